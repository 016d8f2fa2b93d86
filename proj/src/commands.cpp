#include "skinseg/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rawvol.hpp"
#include "skinseg/errors.hpp"
#include "skinseg/metrics.hpp"

namespace skinseg::cli {

using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  detail::write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

void write_json(const std::filesystem::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const std::string& suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

void ensure_parent(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
}

ordered_json box_json(const std::optional<Box>& box) {
  if (!box) return nullptr;
  return {box->min.x, box->min.y, box->min.z, box->max.x, box->max.y, box->max.z};
}

ordered_json isovalue_json(const segmentation::IsovalueReport& report) {
  ordered_json j;
  j["strategy"] = segmentation::to_string(report.strategy);
  j["isovalue"] = report.isovalue;
  j["gradient_preprocessed"] = report.gradient_preprocessed;
  return j;
}

ordered_json config_json(const segmentation::SegmentationConfig& config) {
  ordered_json j;
  j["connectivity"] = static_cast<int>(config.connectivity);
  j["pad_width"] = config.pad_width;
  j["subsample"] = config.subsample_factor;
  if (const auto& s = config.seed.explicit_seed) {
    j["seed"] = {s->x, s->y, s->z};
  } else {
    j["seed"] = "corner_scan";
  }
  return j;
}

/// Load -> segment -> extract -> export, shared by `segment` and `batch`.
struct SegmentStage {
  segmentation::IsovalueReport isovalue;
  std::vector<std::size_t> seedless_slices;
  surface::TriangleMesh mesh;
  bool watertight = false;
  ordered_json timings;

  ordered_json mesh_json() const {
    ordered_json j;
    j["vertices"] = mesh.vertices.size();
    j["triangles"] = mesh.triangles.size();
    j["watertight"] = watertight;
    return j;
  }
};

SegmentStage run_segment_stage(const std::filesystem::path& input, VolumeFormat format,
                               const segmentation::SegmentationConfig& config,
                               const std::filesystem::path& mesh_path,
                               const std::optional<std::filesystem::path>& labels_path) {
  SegmentStage stage;
  auto t = Clock::now();
  const Volume volume = load_volume(input, format);
  stage.timings["load_s"] = seconds_since(t);

  t = Clock::now();
  auto result = segmentation::segment_volume(volume, config);
  stage.timings["segment_s"] = seconds_since(t);
  stage.isovalue = result.report;
  stage.seedless_slices = result.seedless_slices;

  t = Clock::now();
  stage.mesh = surface::extract_surface(result.labels);
  stage.watertight = surface::is_watertight(stage.mesh);
  stage.timings["extract_s"] = seconds_since(t);

  t = Clock::now();
  ensure_parent(mesh_path);
  surface::export_mesh(stage.mesh, mesh_path, surface::mesh_format_from_path(mesh_path));
  if (labels_path) {
    ensure_parent(*labels_path);
    segmentation::save_label_grid(result.labels, *labels_path);
  }
  stage.timings["export_s"] = seconds_since(t);
  spdlog::info("segmented '{}': {} vertices, {} triangles, watertight={}", input.string(),
               stage.mesh.vertices.size(), stage.mesh.triangles.size(), stage.watertight);
  return stage;
}

/// Both directed reports between two (optionally cropped) meshes.
struct Comparison {
  metrics::DistanceReport a_to_b;
  metrics::DistanceReport b_to_a;
  double symmetric = 0.0;

  ordered_json json() const {
    ordered_json j;
    j["a_to_b"] = metrics::summary_json(a_to_b);
    j["b_to_a"] = metrics::summary_json(b_to_a);
    j["symmetric_hausdorff_mm"] = symmetric;
    return j;
  }
};

Comparison compare_meshes(const surface::TriangleMesh& a, const surface::TriangleMesh& b,
                          const std::optional<Box>& crop_a, const std::optional<Box>& crop_b) {
  const auto cropped_a = crop_a ? surface::crop_to_box(a, *crop_a) : a;
  const auto cropped_b = crop_b ? surface::crop_to_box(b, *crop_b) : b;
  if (cropped_a.empty()) throw EmptyPointSetError("mesh A has no vertices after cropping");
  if (cropped_b.empty()) throw EmptyPointSetError("mesh B has no vertices after cropping");
  Comparison c;
  c.a_to_b = metrics::directed_hausdorff(cropped_a, cropped_b, "a->b");
  c.b_to_a = metrics::directed_hausdorff(cropped_b, cropped_a, "b->a");
  c.symmetric = std::max(c.a_to_b.hausdorff, c.b_to_a.hausdorff);
  return c;
}

// ---------------------------------------------------------------------------
// Manifest

struct VolumeRef {
  std::filesystem::path path;
  VolumeFormat format = VolumeFormat::rawvol;
};

struct Subject {
  std::string id;
  VolumeRef a;
  VolumeRef b;
  std::optional<Box> crop_a;
  std::optional<Box> crop_b;
};

Box parse_box_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 6) throw ConfigError(where + ": crop box must be [x0,y0,z0,x1,y1,z1]");
  double v[6];
  for (std::size_t i = 0; i < 6; ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": crop box entries must be numbers");
    v[i] = j[i].get<double>();
  }
  const Box box{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
  if (box.min.x > box.max.x || box.min.y > box.max.y || box.min.z > box.max.z) {
    throw ConfigError(where + ": crop box min must not exceed max");
  }
  return box;
}

VolumeRef parse_volume_ref(const nlohmann::json& j, const std::filesystem::path& base, const std::string& where) {
  VolumeRef ref;
  std::string path;
  std::optional<std::string> format;
  if (j.is_string()) {
    path = j.get<std::string>();
  } else if (j.is_object() && j.contains("path") && j.at("path").is_string()) {
    path = j.at("path").get<std::string>();
    if (j.contains("format")) {
      if (!j.at("format").is_string()) throw ConfigError(where + ": format must be a string");
      format = j.at("format").get<std::string>();
    }
  } else {
    throw ConfigError(where + ": expected a path string or {\"path\", \"format\"}");
  }
  ref.path = std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base / path;
  if (format) {
    const auto parsed = parse_volume_format(*format);
    if (!parsed) throw ConfigError(where + ": unknown format '" + *format + "'");
    ref.format = *parsed;
  } else {
    ref.format = volume_format_from_path(ref.path);
  }
  return ref;
}

bool safe_id(const std::string& id) {
  return !id.empty() && id != "." && id != ".." && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::vector<Subject> read_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    const auto bytes = detail::read_file(path);
    j = nlohmann::json::parse(reinterpret_cast<const char*>(bytes.data()),
                              reinterpret_cast<const char*>(bytes.data()) + bytes.size());
  } catch (const std::exception& e) {
    throw ConfigError("unreadable manifest '" + path.string() + "': " + e.what());
  }
  if (!j.is_array()) throw ConfigError("manifest must be a JSON array of subject records");
  const auto base = path.parent_path();
  std::vector<Subject> subjects;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& r = j[i];
    const std::string where = "manifest entry " + std::to_string(i);
    if (!r.is_object() || !r.contains("subject_id") || !r.at("subject_id").is_string()) {
      throw ConfigError(where + ": missing subject_id");
    }
    Subject s;
    s.id = r.at("subject_id").get<std::string>();
    if (!safe_id(s.id)) throw ConfigError(where + ": subject_id must use [A-Za-z0-9_.-]");
    if (!seen.insert(s.id).second) throw ConfigError(where + ": duplicate subject_id '" + s.id + "'");
    if (!r.contains("volume_a") || !r.contains("volume_b")) throw ConfigError(where + ": needs volume_a and volume_b");
    s.a = parse_volume_ref(r.at("volume_a"), base, where + ".volume_a");
    s.b = parse_volume_ref(r.at("volume_b"), base, where + ".volume_b");
    if (r.contains("crop_a") && !r.at("crop_a").is_null()) s.crop_a = parse_box_json(r.at("crop_a"), where + ".crop_a");
    if (r.contains("crop_b") && !r.at("crop_b").is_null()) s.crop_b = parse_box_json(r.at("crop_b"), where + ".crop_b");
    subjects.push_back(std::move(s));
  }
  return subjects;
}

struct SubjectRow {
  std::string id;
  int exit_code = kOk;
  std::string error;
  std::optional<SegmentStage> a;
  std::optional<SegmentStage> b;
  std::optional<Comparison> comparison;
  ordered_json timings;
};

SubjectRow run_subject(const Subject& subject, const BatchOptions& options) {
  SubjectRow row;
  row.id = subject.id;
  try {
    auto config = options.config;
    config.workers = 1;
    row.a = run_segment_stage(subject.a.path, subject.a.format, config, options.output_dir / (subject.id + "_a.obj"),
                              std::nullopt);
    row.b = run_segment_stage(subject.b.path, subject.b.format, config, options.output_dir / (subject.id + "_b.obj"),
                              std::nullopt);
    const auto t = Clock::now();
    row.comparison = compare_meshes(row.a->mesh, row.b->mesh, subject.crop_a, subject.crop_b);
    metrics::export_per_vertex_scalars(row.comparison->a_to_b, options.output_dir / (subject.id + ".a_to_b.csv"));
    metrics::export_per_vertex_scalars(row.comparison->b_to_a, options.output_dir / (subject.id + ".b_to_a.csv"));
    row.timings["a"] = row.a->timings;
    row.timings["b"] = row.b->timings;
    row.timings["compare_s"] = seconds_since(t);
  } catch (const std::exception& e) {
    row.exit_code = exit_code_for(e);
    row.error = e.what();
    spdlog::error("subject '{}' failed: {}", subject.id, e.what());
  }
  return row;
}

ordered_json row_json(const SubjectRow& row, const Subject& subject) {
  ordered_json j;
  j["subject_id"] = row.id;
  j["status"] = row.exit_code == kOk ? "ok" : "failed";
  if (row.exit_code != kOk) {
    j["exit_code"] = row.exit_code;
    j["error"] = row.error;
    return j;
  }
  for (const auto& [key, stage, crop] : {std::tuple{"a", &row.a, &subject.crop_a}, std::tuple{"b", &row.b, &subject.crop_b}}) {
    ordered_json s;
    s["isovalue"] = isovalue_json((*stage)->isovalue);
    s["mesh"] = (*stage)->mesh_json();
    s["seedless_slices"] = (*stage)->seedless_slices;
    s["crop"] = box_json(*crop);
    j[key] = s;
  }
  j["distances"] = row.comparison->json();
  j["timings"] = row.timings;
  return j;
}

ordered_json aggregate_json(const std::vector<SubjectRow>& rows) {
  const std::pair<const char*, double (*)(const Comparison&)> fields[] = {
      {"hausdorff_a_to_b_mm", [](const Comparison& c) { return c.a_to_b.hausdorff; }},
      {"hausdorff_b_to_a_mm", [](const Comparison& c) { return c.b_to_a.hausdorff; }},
      {"mean_a_to_b_mm", [](const Comparison& c) { return c.a_to_b.mean; }},
      {"mean_b_to_a_mm", [](const Comparison& c) { return c.b_to_a.mean; }},
      {"symmetric_hausdorff_mm", [](const Comparison& c) { return c.symmetric; }},
  };
  ordered_json j;
  std::size_t ok = 0;
  for (const auto& row : rows) ok += row.comparison ? 1 : 0;
  j["subjects"] = rows.size();
  j["succeeded"] = ok;
  j["failed"] = rows.size() - ok;
  for (const auto& [name, get] : fields) {
    ordered_json stat;
    if (ok == 0) {
      stat["mean"] = nullptr;
      stat["max"] = nullptr;
    } else {
      double sum = 0.0;
      double max = -std::numeric_limits<double>::infinity();
      for (const auto& row : rows) {
        if (!row.comparison) continue;
        sum += get(*row.comparison);
        max = std::max(max, get(*row.comparison));
      }
      stat["mean"] = sum / static_cast<double>(ok);
      stat["max"] = max;
    }
    j[name] = stat;
  }
  return j;
}

std::string format_number(double v) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, end);
}

std::string rows_csv(const std::vector<SubjectRow>& rows) {
  std::string csv =
      "subject_id,status,vertices_a,vertices_b,watertight_a,watertight_b,hausdorff_a_to_b_mm,mean_a_to_b_mm,"
      "hausdorff_b_to_a_mm,mean_b_to_a_mm,symmetric_hausdorff_mm\n";
  for (const auto& row : rows) {
    csv += row.id;
    if (!row.comparison) {
      csv += ",failed,,,,,,,,,\n";
      continue;
    }
    const auto& c = *row.comparison;
    csv += ",ok," + std::to_string(row.a->mesh.vertices.size()) + "," + std::to_string(row.b->mesh.vertices.size()) +
           "," + (row.a->watertight ? "true" : "false") + "," + (row.b->watertight ? "true" : "false") + "," +
           format_number(c.a_to_b.hausdorff) + "," + format_number(c.a_to_b.mean) + "," +
           format_number(c.b_to_a.hausdorff) + "," + format_number(c.b_to_a.mean) + "," + format_number(c.symmetric) +
           "\n";
  }
  return csv;
}

/// Runs `body` and maps any escaping exception to an exit code.
template <class F>
int guarded(const char* verb, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", verb, e.what());
    return exit_code_for(e);
  }
}

}  // namespace

int exit_code_for(const std::exception& error) {
  if (const auto* e = dynamic_cast<const Error*>(&error)) return static_cast<int>(e->code());
  if (dynamic_cast<const std::out_of_range*>(&error) != nullptr ||
      dynamic_cast<const std::invalid_argument*>(&error) != nullptr ||
      dynamic_cast<const nlohmann::json::exception*>(&error) != nullptr) {
    return kConfigError;
  }
  return kIoError;
}

void configure_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("skinseg");
    spdlog::set_default_logger(logger);
  });
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("SKINSEG_LOG")) {
    const std::string value = env;
    if (value == "error") level = spdlog::level::err;
    else if (value == "warn") level = spdlog::level::warn;
    else if (value == "info") level = spdlog::level::info;
    else if (value == "debug") level = spdlog::level::debug;
  }
  spdlog::set_level(level);
}

std::filesystem::path segment_report_path(const std::filesystem::path& mesh) {
  return mesh.parent_path() / (mesh.stem().string() + ".isovalue.json");
}

int cmd_segment(const SegmentOptions& options) {
  return guarded("segment", [&] {
    options.config.validate();
    const auto format = options.format.value_or(volume_format_from_path(options.input));
    const auto stage = run_segment_stage(options.input, format, options.config, options.output_mesh,
                                         options.output_labels);
    ordered_json report;
    report["input"] = options.input.string();
    report["format"] = to_string(format);
    report["isovalue"] = isovalue_json(stage.isovalue);
    report["config"] = config_json(options.config);
    report["mesh"] = stage.mesh_json();
    report["seedless_slices"] = stage.seedless_slices;
    report["timings"] = stage.timings;
    write_json(segment_report_path(options.output_mesh), report);
    return static_cast<int>(kOk);
  });
}

int cmd_compare(const CompareOptions& options) {
  return guarded("compare", [&] {
    if (options.crops.size() > 2) throw ConfigError("at most two crop boxes (A, then B)");
    std::optional<Box> crop_a, crop_b;
    if (!options.crops.empty()) {
      crop_a = options.crops.front();
      crop_b = options.crops.back();
    }
    const auto a = surface::import_mesh(options.mesh_a, surface::mesh_format_from_path(options.mesh_a));
    const auto b = surface::import_mesh(options.mesh_b, surface::mesh_format_from_path(options.mesh_b));
    const auto comparison = compare_meshes(a, b, crop_a, crop_b);

    ensure_parent(options.output);
    metrics::export_per_vertex_scalars(comparison.a_to_b, with_suffix(options.output, ".a_to_b.csv"));
    metrics::export_per_vertex_scalars(comparison.b_to_a, with_suffix(options.output, ".b_to_a.csv"));
    ordered_json report;
    report["mesh_a"] = options.mesh_a.string();
    report["mesh_b"] = options.mesh_b.string();
    report["crop_a"] = box_json(crop_a);
    report["crop_b"] = box_json(crop_b);
    const ordered_json summary = comparison.json();
    for (const auto& [key, value] : summary.items()) report[key] = value;
    write_json(with_suffix(options.output, ".json"), report);
    spdlog::info("compare: symmetric Hausdorff {} mm", comparison.symmetric);
    return static_cast<int>(kOk);
  });
}

int cmd_batch(const BatchOptions& options) {
  std::vector<Subject> subjects;
  try {
    options.config.validate();
    if (options.jobs < 1) throw ConfigError("--jobs must be >= 1");
    subjects = read_manifest(options.manifest);
  } catch (const std::exception& e) {
    spdlog::error("batch: {}", e.what());
    return kConfigError;
  }
  return guarded("batch", [&] {
    std::error_code ec;
    std::filesystem::create_directories(options.output_dir, ec);
    if (ec) throw IoError("cannot create '" + options.output_dir.string() + "': " + ec.message());

    std::vector<SubjectRow> rows(subjects.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t i = next++; i < subjects.size(); i = next++) rows[i] = run_subject(subjects[i], options);
    };
    const std::size_t jobs = std::min(options.jobs, std::max<std::size_t>(subjects.size(), 1));
    if (jobs <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    }

    ordered_json report;
    report["manifest"] = options.manifest.string();
    report["config"] = config_json(options.config);
    report["config"]["isovalue_strategy"] = segmentation::to_string(options.config.isovalue.kind);
    report["config"]["isovalue"] = options.config.isovalue.value;
    report["subjects"] = ordered_json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) report["subjects"].push_back(row_json(rows[i], subjects[i]));
    report["aggregate"] = aggregate_json(rows);
    write_json(options.output_dir / "run_report.json", report);
    write_text(options.output_dir / "run_report.csv", rows_csv(rows));

    const bool any_failed = std::any_of(rows.begin(), rows.end(), [](const SubjectRow& r) { return r.exit_code != kOk; });
    return static_cast<int>(any_failed ? kBatchPartialFailure : kOk);
  });
}

int cmd_phantom(const PhantomOptions& options) {
  return guarded("phantom", [&] {
    const auto phantom = phantom::generate(options.spec, options.seed);
    ensure_parent(options.output);
    save_volume(phantom.volume, options.output);
    const auto& s = options.spec;
    ordered_json j;
    j["seed"] = options.seed;
    j["dims"] = {s.grid.dims.nx, s.grid.dims.ny, s.grid.dims.nz};
    j["spacing"] = {s.grid.spacing.x, s.grid.spacing.y, s.grid.spacing.z};
    j["origin"] = {s.grid.origin.x, s.grid.origin.y, s.grid.origin.z};
    j["body_intensity"] = s.body_intensity;
    j["background_intensity"] = s.background_intensity;
    j["noise_amplitude"] = s.noise_amplitude;
    j["truth"] = phantom.truth.to_json();
    write_json(options.output.parent_path() / (options.output.stem().string() + ".truth.json"), j);
    return static_cast<int>(kOk);
  });
}

std::optional<double> fit_loglog_slope(const std::vector<double>& voxels, const std::vector<double>& seconds) {
  const std::size_t n = std::min(voxels.size(), seconds.size());
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(voxels[i]);
    my += std::log(seconds[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(voxels[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(seconds[i]) - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

int cmd_bench(const BenchOptions& options) {
  return guarded("bench", [&] {
    if (options.sizes.empty()) throw ConfigError("bench needs at least one size");
    for (std::size_t i = 0; i < options.sizes.size(); ++i) {
      if (options.sizes[i] < 4) throw ConfigError("bench sizes must be >= 4");
      if (i > 0 && options.sizes[i] <= options.sizes[i - 1]) throw ConfigError("bench sizes must be strictly ascending");
    }
    options.config.validate();

    constexpr double kMinTotalSeconds = 0.25;
    std::vector<double> voxels, seconds;
    ordered_json rows = ordered_json::array();
    std::string csv = "voxels,seconds\n";
    for (std::size_t n : options.sizes) {
      const auto phantom = phantom::generate(phantom::centered_sphere(n, 0.3125 * static_cast<double>(n)), 0);
      double best = std::numeric_limits<double>::infinity();
      double total = 0.0;
      for (std::size_t run = 0; run < std::max<std::size_t>(options.repeats, 1) || total < kMinTotalSeconds; ++run) {
        const auto t = Clock::now();
        const auto result = segmentation::segment_volume(phantom.volume, options.config);
        const double elapsed = seconds_since(t);
        best = std::min(best, elapsed);
        total += elapsed;
      }
      const double count = static_cast<double>(phantom.volume.dims().count());
      voxels.push_back(count);
      seconds.push_back(best);
      csv += std::to_string(phantom.volume.dims().count()) + "," + format_number(best) + "\n";
      rows.push_back({{"size", n}, {"voxels", phantom.volume.dims().count()}, {"seconds", best}});
      spdlog::info("bench: {}^3 -> {:.6f} s", n, best);
    }
    const auto slope = fit_loglog_slope(voxels, seconds);
    ensure_parent(options.output);
    write_text(options.output, csv);
    ordered_json j;
    j["rows"] = rows;
    j["slope"] = slope ? ordered_json(*slope) : ordered_json(nullptr);
    auto json_path = options.output;
    json_path.replace_extension(".json");
    write_json(json_path, j);
    return static_cast<int>(kOk);
  });
}

}  // namespace skinseg::cli
