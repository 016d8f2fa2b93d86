#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skinseg/geometry.hpp"
#include "skinseg/phantom.hpp"
#include "skinseg/segmentation.hpp"
#include "skinseg/surface.hpp"
#include "skinseg/volume.hpp"

namespace skinseg::cli {

/// Exit codes of the command-line verbs.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kDegenerateVolume = 2,
  kConfigError = 3,
  kEmptyMesh = 4,
  kBatchPartialFailure = 5,
};

/// Maps any exception escaping a module to its exit code.
int exit_code_for(const std::exception& error);

/// Applies SKINSEG_LOG={error,warn,info,debug} to the default logger.
void configure_logging();

struct SegmentOptions {
  std::filesystem::path input;
  std::optional<VolumeFormat> format;  // inferred from the extension when unset
  segmentation::SegmentationConfig config;
  std::filesystem::path output_mesh;
  std::optional<std::filesystem::path> output_labels;
};

/// `<mesh stem>.isovalue.json`, written beside the mesh by cmd_segment.
std::filesystem::path segment_report_path(const std::filesystem::path& mesh);

int cmd_segment(const SegmentOptions& options);

struct CompareOptions {
  std::filesystem::path mesh_a;
  std::filesystem::path mesh_b;
  /// Region kept from each mesh. One box applies to both meshes, two boxes
  /// apply to A and B respectively.
  std::vector<Box> crops;
  /// Output prefix: writes <prefix>.json, <prefix>.a_to_b.{csv,json} and
  /// <prefix>.b_to_a.{csv,json}.
  std::filesystem::path output;
};

int cmd_compare(const CompareOptions& options);

struct BatchOptions {
  std::filesystem::path manifest;
  segmentation::SegmentationConfig config;
  std::filesystem::path output_dir;
  std::size_t jobs = 1;
};

/// Writes <output_dir>/<subject>_{a,b}.obj, run_report.json and run_report.csv.
int cmd_batch(const BatchOptions& options);

struct PhantomOptions {
  phantom::PhantomSpec spec;
  std::uint64_t seed = 0;
  /// rawvol header path; the ground truth goes to `<stem>.truth.json`.
  std::filesystem::path output;
};

int cmd_phantom(const PhantomOptions& options);

struct BenchOptions {
  /// Edge lengths of the cubic sphere phantoms, strictly ascending.
  std::vector<std::size_t> sizes;
  /// CSV path; the fitted slope goes to the sibling `.json`.
  std::filesystem::path output;
  segmentation::SegmentationConfig config;
  /// Minimum timed runs per size; the fastest run is reported.
  std::size_t repeats = 3;
};

int cmd_bench(const BenchOptions& options);

/// Least-squares slope of log(seconds) against log(voxels); nullopt with
/// fewer than two points.
std::optional<double> fit_loglog_slope(const std::vector<double>& voxels,
                                       const std::vector<double>& seconds);

/// Parses argv and dispatches to the verbs above.
int run(int argc, char** argv);

}  // namespace skinseg::cli
