// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skinseg/commands.hpp"
#include "skinseg/errors.hpp"
#include "skinseg/metrics.hpp"
#include "skinseg/phantom.hpp"
#include "skinseg/segmentation.hpp"
#include "skinseg/surface.hpp"
#include "test_support.hpp"

using namespace skinseg;
using skinseg::testing::read_text;
using skinseg::testing::TempDir;
using json = nlohmann::json;

namespace {

const double kSqrt3 = std::sqrt(3.0);

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::optional<double> budget_s;
  std::function<Outcome()> check;
};

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer), format, args...);
  return buffer;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "skinseg");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

surface::TriangleMesh sphere_mesh(std::size_t n, double radius, segmentation::SegmentationConfig config = {}) {
  const auto phantom = phantom::generate(phantom::centered_sphere(n, radius), 0);
  return surface::extract_surface(segmentation::segment_volume(phantom.volume, config).labels);
}

bool bit_exact(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  return metrics::directed_hausdorff(from, to).per_vertex == skinseg::testing::brute_force_nearest(from, to);
}

Outcome flood_fill_oracle() {
  std::mt19937_64 rng(20240601);
  std::size_t slices = 0, mismatches = 0, largest = 0;
  std::size_t per_kind[2][2] = {};
  while (slices < 1200) {
    const std::size_t nx = 1 + rng() % 64;
    const std::size_t ny = 1 + rng() % 64;
    const bool binary = rng() % 2 == 0;
    const auto conn = rng() % 2 == 0 ? segmentation::Connectivity::four : segmentation::Connectivity::eight;
    const auto img = skinseg::testing::random_image(rng, nx, ny, binary, 0.05 + 0.6 * ((rng() % 100) / 100.0));
    const double iso = binary ? 0.5 : 0.05 + 0.9 * ((rng() % 1000) / 1000.0);
    segmentation::PixelCoord seed;
    try {
      seed = segmentation::select_seed(img.view(), iso);
    } catch (const NoSeedError&) {
      continue;
    }
    const auto got = segmentation::segment_slice(img.view(), iso, seed, conn);
    if (got.labels != skinseg::testing::oracle_labels(img.view(), iso, seed, conn)) ++mismatches;
    ++per_kind[binary][conn == segmentation::Connectivity::eight];
    largest = std::max(largest, nx * ny);
    ++slices;
  }
  const bool covered = per_kind[0][0] && per_kind[0][1] && per_kind[1][0] && per_kind[1][1];
  return {mismatches == 0 && covered,
          fmt("%zu slices (largest %zu px), %zu mismatches", slices, largest, mismatches)};
}

Outcome sphere_accuracy() {
  const auto spec = phantom::centered_sphere(64, 20.0);
  const auto& center = std::get<phantom::Sphere>(spec.shape).center;
  segmentation::SegmentationConfig config;
  config.isovalue = segmentation::IsovalueStrategy::fixed(0.1);
  config.pad_width = 1;
  const auto mesh = surface::extract_surface(
      segmentation::segment_volume(phantom::generate(spec, 0).volume, config).labels);
  double worst = 0.0;
  for (const Vec3& v : mesh.vertices) worst = std::max(worst, std::abs(norm(v - center) - 20.0));
  return {!mesh.empty() && worst <= kSqrt3,
          fmt("%zu vertices, max | |v-c| - r | = %.4f mm (limit %.4f)", mesh.vertices.size(), worst, kSqrt3)};
}

Outcome concentric_spheres() {
  const auto inner = sphere_mesh(64, 20.0);
  const auto outer = sphere_mesh(64, 25.0);
  const double h = metrics::symmetric_hausdorff(inner, outer);
  const bool in_range = h >= 5.0 - 2.0 * kSqrt3 && h <= 5.0 + 2.0 * kSqrt3;

  const auto small_a = sphere_mesh(40, 12.0);
  const auto small_b = sphere_mesh(40, 15.0);
  const bool small_sizes = small_a.vertices.size() <= 5000 && small_b.vertices.size() <= 5000;
  const bool exact = bit_exact(small_a.vertices, small_b.vertices) && bit_exact(small_b.vertices, small_a.vertices);
  return {in_range && small_sizes && exact,
          fmt("symmetric Hausdorff %.4f mm in [%.4f, %.4f]; k-d tree %s brute force on %zu/%zu-vertex meshes", h,
              5.0 - 2.0 * kSqrt3, 5.0 + 2.0 * kSqrt3, exact ? "equals" : "differs from", small_a.vertices.size(),
              small_b.vertices.size())};
}

Outcome padding_closes_holes() {
  GridGeometry grid;
  grid.dims = {48, 48, 48};
  const phantom::PhantomSpec spec{phantom::BorderTouchingSphere{{23.5, 23.5, 42.0}, 12.0}, grid};
  const auto volume = phantom::generate(spec, 0).volume;
  segmentation::SegmentationConfig config;
  config.pad_width = 0;
  const auto open = surface::extract_surface(segmentation::segment_volume(volume, config).labels);
  config.pad_width = 1;
  const auto closed = surface::extract_surface(segmentation::segment_volume(volume, config).labels);
  const bool open_leaks = !open.empty() && !surface::is_watertight(open);
  const bool closed_ok = surface::is_watertight(closed);
  return {open_leaks && closed_ok, fmt("pad 0: watertight=%s (%zu tris); pad 1: watertight=%s (%zu tris)",
                                       open_leaks ? "false" : "true", open.triangles.size(),
                                       closed_ok ? "true" : "false", closed.triangles.size())};
}

Outcome linear_scaling() {
  TempDir dir;
  const int code = run_cli({"bench", "--sizes", "32,64,128,192", "-o", (dir / "bench.csv").string()});
  if (code != 0) return {false, fmt("bench exited with %d", code)};
  const auto summary = json::parse(read_text(dir / "bench.json"));
  const double slope = summary.at("slope").get<double>();
  std::string times;
  for (const auto& row : summary.at("rows")) {
    times += fmt(" %.0f:%.4fs", row.at("voxels").get<double>(), row.at("seconds").get<double>());
  }
  return {slope >= 0.8 && slope <= 1.25, fmt("log-log slope %.3f in [0.8, 1.25];%s", slope, times.c_str())};
}

Outcome subsampling_stability() {
  const auto full = sphere_mesh(64, 20.0);
  segmentation::SegmentationConfig coarse_config;
  coarse_config.subsample_factor = {2, 2, 2};
  const auto coarse = sphere_mesh(64, 20.0, coarse_config);
  const double h = metrics::symmetric_hausdorff(full, coarse);
  const double limit = 4.0 * kSqrt3;
  return {!coarse.empty() && h <= limit, fmt("symmetric Hausdorff %.4f mm (limit %.4f)", h, limit)};
}

Outcome isovalue_defaults() {
  TempDir dir;
  const auto input = dir / "s.json";
  save_volume(phantom::generate(phantom::centered_sphere(24, 8.0), 0).volume, input);
  std::string detail;
  bool ok = true;
  for (const auto& [strategy, expected, preprocessed] :
       {std::tuple{"fixed", 0.1, false}, std::tuple{"gradient", 0.01, true}}) {
    const auto mesh = dir / (std::string(strategy) + ".obj");
    const int code = run_cli({"segment", input.string(), "-o", mesh.string(), "--isovalue-strategy", strategy});
    if (code != 0) return {false, fmt("segment (%s) exited with %d", strategy, code)};
    const auto report = json::parse(read_text(cli::segment_report_path(mesh))).at("isovalue");
    const bool match = report.at("strategy") == strategy && report.at("isovalue") == expected &&
                       report.at("gradient_preprocessed") == preprocessed;
    ok = ok && match;
    detail += fmt("%s%s -> %g", detail.empty() ? "" : "; ", strategy, report.at("isovalue").get<double>());
  }
  return {ok, detail};
}

Outcome batch_determinism() {
  TempDir dir;
  json manifest = json::array();
  const double radii[4] = {8.0, 9.5, 11.0, 12.5};
  for (int i = 0; i < 4; ++i) {
    for (const char* side : {"a", "b"}) {
      auto spec = phantom::centered_sphere(32, radii[i] + (side[0] == 'b' ? 1.0 : 0.0));
      spec.noise_amplitude = 0.02f;
      const std::string name = fmt("s%d_%s.json", i, side);
      save_volume(phantom::generate(spec, static_cast<std::uint64_t>(10 * i + (side[0] == 'b'))).volume, dir / name);
    }
    manifest.push_back({{"subject_id", fmt("subject%d", i)},
                        {"volume_a", fmt("s%d_a.json", i)},
                        {"volume_b", fmt("s%d_b.json", i)}});
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2);

  for (const char* jobs : {"4", "1"}) {
    const int code = run_cli({"batch", (dir / "manifest.json").string(), "-o", (dir / (std::string("run") + jobs)).string(),
                              "--jobs", jobs});
    if (code != 0) return {false, fmt("batch --jobs %s exited with %d", jobs, code)};
  }
  std::size_t files = 0, differing = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "run1")) {
    const auto name = entry.path().filename();
    if (name == "run_report.json") continue;
    ++files;
    if (read_text(entry.path()) != read_text(dir / "run4" / name)) ++differing;
  }
  const auto strip = [](json report) {
    for (auto& row : report.at("subjects")) row.erase("timings");
    return report;
  };
  const json rows1 = strip(json::parse(read_text(dir / "run1/run_report.json")));
  const json rows4 = strip(json::parse(read_text(dir / "run4/run_report.json")));
  const bool rows_equal = rows1.at("subjects") == rows4.at("subjects") && rows1.at("aggregate") == rows4.at("aggregate");
  return {files >= 13 && differing == 0 && rows_equal,
          fmt("%zu output files compared, %zu differ; report rows %s", files, differing,
              rows_equal ? "identical" : "differ")};
}

Outcome bed_persistence() {
  TempDir dir;
  GridGeometry grid;
  grid.dims = {64, 64, 64};
  const Box bed{{6, 8, 4}, {57, 14, 59}};
  const phantom::BodyWithBed body{{32, 38, 32}, {20, 14, 25}, bed};
  save_volume(phantom::generate({body, grid}, 0).volume, dir / "bed.json");
  save_volume(phantom::generate({phantom::Sphere{{32, 38, 32}, 10.0}, grid}, 0).volume, dir / "ref.json");
  if (run_cli({"segment", (dir / "bed.json").string(), "-o", (dir / "bed.obj").string()}) != 0 ||
      run_cli({"segment", (dir / "ref.json").string(), "-o", (dir / "ref.obj").string()}) != 0) {
    return {false, "segment failed"};
  }
  const auto mesh = surface::import_mesh(dir / "bed.obj", surface::MeshFormat::obj);
  const auto box = surface::bounding_box(mesh);
  const bool contains_slab = box && box->contains(bed.min) && box->contains(bed.max);

  // Slab vertices lie within half a voxel of the slab.
  const Box slab_zone{bed.min - Vec3{1, 1, 1}, bed.max + Vec3{1, 1, 1}};
  const Box crop{{0, 20, 0}, {63, 63, 63}};
  std::size_t slab_vertices = 0, kept_expected = 0, kept_in_slab = 0;
  for (const Vec3& v : mesh.vertices) {
    const bool in_slab = slab_zone.contains(v);
    slab_vertices += in_slab;
    if (crop.contains(v)) {
      ++kept_expected;
      kept_in_slab += in_slab;
    }
  }
  const std::string crop_arg = "0,20,0,63,63,63";
  const int code = run_cli({"compare", (dir / "bed.obj").string(), (dir / "ref.obj").string(), "-o",
                            (dir / "cmp").string(), "--crop", crop_arg, "--crop", crop_arg});
  if (code != 0) return {false, fmt("compare exited with %d", code)};
  const auto summary = json::parse(read_text(dir / "cmp.a_to_b.json"));
  const bool cropped_count = summary.at("vertex_count") == kept_expected;
  const bool slab_removed = slab_vertices > 0 && kept_in_slab == 0 && cropped_count;
  return {contains_slab && slab_removed,
          fmt("mesh bbox %s slab; %zu slab vertices before crop, %zu after; cropped A has %zu vertices",
              contains_slab ? "contains" : "misses", slab_vertices, kept_in_slab,
              summary.at("vertex_count").get<std::size_t>())};
}

}  // namespace

int main() {
  setenv("SKINSEG_LOG", "error", 1);
  cli::configure_logging();

  const std::vector<Criterion> criteria = {
      {1, "flood-fill oracle equivalence", 60.0, flood_fill_oracle},
      {2, "sphere accuracy", 10.0, sphere_accuracy},
      {3, "concentric-sphere Hausdorff", 30.0, concentric_spheres},
      {4, "padding closes border holes", 10.0, padding_closes_holes},
      {5, "linear scaling", 120.0, linear_scaling},
      {6, "subsampling stability", 20.0, subsampling_stability},
      {7, "isovalue defaults", std::nullopt, isovalue_defaults},
      {8, "batch determinism", 60.0, batch_determinism},
      {9, "bed persistence and crop", std::nullopt, bed_persistence},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.2f s", seconds);
    if (c.budget_s) {
      timing += fmt(" / budget %.0f s", *c.budget_s);
      if (seconds > *c.budget_s) {
        outcome.pass = false;
        outcome.detail += "; over time budget";
      }
    }
    if (!outcome.pass) ++failures;
    std::printf("%s [%d] %s: %s (%s)\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), outcome.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
