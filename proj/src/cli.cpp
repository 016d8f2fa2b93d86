#include <charconv>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skinseg/commands.hpp"
#include "skinseg/errors.hpp"

namespace skinseg::cli {

namespace {

std::vector<double> parse_numbers(const std::string& text, std::size_t count, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || end != item.data() + item.size()) {
      throw ConfigError(flag + ": '" + item + "' is not a number");
    }
    values.push_back(v);
  }
  if (values.size() != count) {
    throw ConfigError(flag + " expects " + std::to_string(count) + " comma-separated values, got '" + text + "'");
  }
  return values;
}

Vec3 parse_vec3(const std::string& text, const std::string& flag) {
  const auto v = parse_numbers(text, 3, flag);
  return {v[0], v[1], v[2]};
}

std::array<std::size_t, 3> parse_counts(const std::string& text, const std::string& flag) {
  const auto v = parse_numbers(text, 3, flag);
  std::array<std::size_t, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (v[i] < 0 || v[i] != static_cast<double>(static_cast<std::size_t>(v[i]))) {
      throw ConfigError(flag + " expects non-negative integers");
    }
    out[i] = static_cast<std::size_t>(v[i]);
  }
  return out;
}

Box parse_box(const std::string& text) {
  const auto v = parse_numbers(text, 6, "--crop");
  const Box box{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
  if (box.min.x > box.max.x || box.min.y > box.max.y || box.min.z > box.max.z) {
    throw ConfigError("--crop: min corner must not exceed max corner");
  }
  return box;
}

/// Flags shared by every verb that runs the segmentation.
struct SegmentationFlags {
  std::string strategy = "fixed";
  std::optional<double> isovalue;
  int connectivity = 4;
  std::size_t pad = 1;
  std::string subsample = "1,1,1";
  std::string seed_voxel;

  void add_to(CLI::App& app) {
    app.add_option("--isovalue-strategy", strategy, "fixed (normalized intensity) or gradient")
        ->check(CLI::IsMember({"fixed", "gradient"}));
    app.add_option("--isovalue", isovalue, "threshold in (0,1); defaults 0.1 fixed / 0.01 gradient");
    app.add_option("--connectivity", connectivity, "in-slice neighbourhood")->check(CLI::IsMember({4, 8}));
    app.add_option("--pad", pad, "background padding width in voxels");
    app.add_option("--subsample", subsample, "per-axis decimation factors fx,fy,fz");
    app.add_option("--seed-voxel", seed_voxel, "explicit in-slice seed x,y,z (default: corner scan)");
  }

  segmentation::SegmentationConfig config() const {
    segmentation::SegmentationConfig c;
    c.isovalue.kind = strategy == "gradient" ? segmentation::IsovalueStrategy::Kind::gradient
                                             : segmentation::IsovalueStrategy::Kind::fixed;
    c.isovalue.value = isovalue.value_or(segmentation::IsovalueStrategy::default_value(c.isovalue.kind));
    c.connectivity = connectivity == 8 ? segmentation::Connectivity::eight : segmentation::Connectivity::four;
    c.pad_width = pad;
    c.subsample_factor = parse_counts(subsample, "--subsample");
    if (!seed_voxel.empty()) {
      const auto s = parse_counts(seed_voxel, "--seed-voxel");
      c.seed.explicit_seed = VoxelCoord{s[0], s[1], s[2]};
    }
    c.validate();
    return c;
  }
};

std::optional<VolumeFormat> format_flag(const std::string& name) {
  if (name.empty()) return std::nullopt;
  return parse_volume_format(name);
}

}  // namespace

int run(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Skin surface segmentation, surface extraction and mesh comparison"};
  app.require_subcommand(1);

  // segment
  auto* segment = app.add_subcommand("segment", "segment a volume and export the skin mesh");
  SegmentOptions segment_options;
  SegmentationFlags segment_flags;
  std::string segment_format;
  std::string segment_labels;
  segment->add_option("input", segment_options.input, "volume file (.nii, .nii.gz or rawvol header)")->required();
  segment->add_option("-o,--output", segment_options.output_mesh, "mesh path (.obj or .ply)")->required();
  segment->add_option("--format", segment_format)->check(CLI::IsMember({"nifti1", "rawvol"}));
  segment->add_option("--labels", segment_labels, "also write the label grid (rawvol u8 header path)");
  segment->add_option("--jobs", segment_options.config.workers, "slice worker threads")->check(CLI::PositiveNumber);
  segment_flags.add_to(*segment);

  // compare
  auto* compare = app.add_subcommand("compare", "directed and symmetric Hausdorff between two meshes");
  CompareOptions compare_options;
  std::vector<std::string> crops;
  compare->add_option("mesh_a", compare_options.mesh_a)->required();
  compare->add_option("mesh_b", compare_options.mesh_b)->required();
  compare->add_option("-o,--output", compare_options.output, "output prefix")->required();
  compare->add_option("--crop", crops, "kept region x0,y0,z0,x1,y1,z1 in mm (once: both, twice: A then B)");

  // batch
  auto* batch = app.add_subcommand("batch", "segment and compare paired volumes listed in a manifest");
  BatchOptions batch_options;
  SegmentationFlags batch_flags;
  batch->add_option("manifest", batch_options.manifest)->required();
  batch->add_option("-o,--output", batch_options.output_dir, "output directory")->required();
  batch->add_option("--jobs", batch_options.jobs, "subjects processed concurrently")->check(CLI::PositiveNumber);
  batch_flags.add_to(*batch);

  // phantom
  auto* phantom_cmd = app.add_subcommand("phantom", "generate a synthetic phantom volume");
  PhantomOptions phantom_options;
  std::string kind = "sphere";
  std::string dims = "64,64,64", spacing = "1,1,1", origin = "0,0,0";
  std::string center, box_min, box_max, radii, bed_min, bed_max;
  std::optional<double> radius;
  float body = 1.0f, background = 0.0f, noise = 0.0f;
  phantom_cmd->add_option("--kind", kind)
      ->check(CLI::IsMember({"sphere", "box", "body_with_bed", "border_touching_sphere"}));
  phantom_cmd->add_option("--dims", dims, "nx,ny,nz");
  phantom_cmd->add_option("--spacing", spacing, "sx,sy,sz in mm");
  phantom_cmd->add_option("--origin", origin, "world position of voxel (0,0,0) in mm");
  phantom_cmd->add_option("--center", center, "sphere/body center in mm (default: grid center)");
  phantom_cmd->add_option("--radius", radius, "sphere radius in mm");
  phantom_cmd->add_option("--min", box_min, "box min corner in mm");
  phantom_cmd->add_option("--max", box_max, "box max corner in mm");
  phantom_cmd->add_option("--radii", radii, "body ellipsoid radii in mm");
  phantom_cmd->add_option("--bed-min", bed_min, "bed slab min corner in mm");
  phantom_cmd->add_option("--bed-max", bed_max, "bed slab max corner in mm");
  phantom_cmd->add_option("--body", body, "body intensity");
  phantom_cmd->add_option("--background", background, "background intensity");
  phantom_cmd->add_option("--noise", noise, "uniform noise half-width");
  phantom_cmd->add_option("--seed", phantom_options.seed, "noise RNG seed");
  phantom_cmd->add_option("-o,--output", phantom_options.output, "rawvol header path")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "time segmentation on sphere phantoms of growing size");
  BenchOptions bench_options;
  SegmentationFlags bench_flags;
  std::string sizes;
  bench->add_option("--sizes", sizes, "ascending edge lengths, e.g. 32,64,128")->required();
  bench->add_option("-o,--output", bench_options.output, "CSV path")->required();
  bench->add_option("--repeats", bench_options.repeats, "minimum timed runs per size");
  bench_flags.add_to(*bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (segment->parsed()) {
      segment_options.config = [&] {
        auto c = segment_flags.config();
        c.workers = segment_options.config.workers;
        return c;
      }();
      segment_options.format = format_flag(segment_format);
      if (!segment_labels.empty()) segment_options.output_labels = segment_labels;
      return cmd_segment(segment_options);
    }
    if (compare->parsed()) {
      for (const auto& c : crops) compare_options.crops.push_back(parse_box(c));
      return cmd_compare(compare_options);
    }
    if (batch->parsed()) {
      batch_options.config = batch_flags.config();
      return cmd_batch(batch_options);
    }
    if (phantom_cmd->parsed()) {
      auto& spec = phantom_options.spec;
      const auto d = parse_counts(dims, "--dims");
      spec.grid.dims = {d[0], d[1], d[2]};
      spec.grid.spacing = parse_vec3(spacing, "--spacing");
      spec.grid.origin = parse_vec3(origin, "--origin");
      spec.grid.validate();
      spec.body_intensity = body;
      spec.background_intensity = background;
      spec.noise_amplitude = noise;
      const Vec3 grid_center = spec.grid.world(0.5 * static_cast<double>(d[0] - 1), 0.5 * static_cast<double>(d[1] - 1),
                                               0.5 * static_cast<double>(d[2] - 1));
      const Vec3 c = center.empty() ? grid_center : parse_vec3(center, "--center");
      const auto require = [](const std::string& value, const char* flag) -> const std::string& {
        if (value.empty()) throw ConfigError(std::string(flag) + " is required for this phantom kind");
        return value;
      };
      if (kind == "sphere" || kind == "border_touching_sphere") {
        if (!radius) throw ConfigError("--radius is required for sphere phantoms");
        if (kind == "sphere") {
          spec.shape = phantom::Sphere{c, *radius};
        } else {
          spec.shape = phantom::BorderTouchingSphere{c, *radius};
        }
      } else if (kind == "box") {
        spec.shape = phantom::Block{{parse_vec3(require(box_min, "--min"), "--min"),
                                     parse_vec3(require(box_max, "--max"), "--max")}};
      } else {
        spec.shape = phantom::BodyWithBed{c, parse_vec3(require(radii, "--radii"), "--radii"),
                                          {parse_vec3(require(bed_min, "--bed-min"), "--bed-min"),
                                           parse_vec3(require(bed_max, "--bed-max"), "--bed-max")}};
      }
      return cmd_phantom(phantom_options);
    }
    if (bench->parsed()) {
      std::stringstream ss(sizes);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::size_t n = 0;
        const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
        if (ec != std::errc() || end != item.data() + item.size()) throw ConfigError("--sizes: bad entry '" + item + "'");
        bench_options.sizes.push_back(n);
      }
      bench_options.config = bench_flags.config();
      return cmd_bench(bench_options);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kConfigError;
}

}  // namespace skinseg::cli
