#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "skinseg/geometry.hpp"
#include "skinseg/volume.hpp"

namespace skinseg::segmentation {

enum class Label : std::uint8_t {
  background = 0,
  boundary = 1,
  interior = 2,
};

enum class Connectivity : int { four = 4, eight = 8 };

/// Per-voxel classification grid sharing the geometry of the volume it was
/// computed from.
class LabelGrid {
 public:
  LabelGrid(GridGeometry geometry, Label fill);
  LabelGrid(GridGeometry geometry, std::vector<Label> labels);

  const GridGeometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims; }

  std::span<const Label> labels() const { return labels_; }
  std::span<Label> labels() { return labels_; }

  Label at(std::size_t x, std::size_t y, std::size_t z) const {
    return labels_[geometry_.index(x, y, z)];
  }

  std::span<const Label> slice(std::size_t z) const;
  std::span<Label> slice(std::size_t z);

  std::size_t count(Label label) const;

  friend bool operator==(const LabelGrid&, const LabelGrid&) = default;

 private:
  GridGeometry geometry_;
  std::vector<Label> labels_;
};

struct IsovalueStrategy {
  enum class Kind { fixed, gradient };

  Kind kind = Kind::fixed;
  double value = 0.1;

  /// Threshold on normalized intensities. 0.1 works for normalized T2 MR and CT.
  static constexpr IsovalueStrategy fixed(double value = 0.1) { return {Kind::fixed, value}; }
  /// Threshold on the normalized gradient magnitude.
  static constexpr IsovalueStrategy gradient(double value = 0.01) { return {Kind::gradient, value}; }

  static constexpr double default_value(Kind kind) { return kind == Kind::fixed ? 0.1 : 0.01; }
};

std::string_view to_string(IsovalueStrategy::Kind kind);

/// Seed placement: scan the slice corners, or use a fixed in-plane position
/// (the z of an explicit seed is ignored; every slice uses the same x, y).
struct SeedPolicy {
  std::optional<VoxelCoord> explicit_seed;
};

struct SegmentationConfig {
  IsovalueStrategy isovalue = IsovalueStrategy::fixed();
  Connectivity connectivity = Connectivity::four;
  std::size_t pad_width = 1;
  SeedPolicy seed;
  AxisFactors subsample_factor{1, 1, 1};
  /// Worker threads for slice processing. Output does not depend on it.
  std::size_t workers = 1;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct IsovalueReport {
  IsovalueStrategy::Kind strategy = IsovalueStrategy::Kind::fixed;
  double isovalue = 0.1;
  bool gradient_preprocessed = false;

  friend bool operator==(const IsovalueReport&, const IsovalueReport&) = default;
};

struct ResolvedVolume {
  Volume volume;
  IsovalueReport report;
};

/// Normalizes (fixed) or builds the normalized gradient volume (gradient).
ResolvedVolume resolve_isovalue(const Volume& volume, const IsovalueStrategy& strategy);

struct PixelCoord {
  std::size_t x = 0;
  std::size_t y = 0;
  friend constexpr bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// First corner below the isovalue, scanning (0,0), (nx-1,0), (0,ny-1),
/// (nx-1,ny-1). Throws NoSeedError when none qualifies.
PixelCoord select_seed(const SliceView& slice, double isovalue);

struct FillStats {
  /// Intensity comparisons performed (seed included).
  std::size_t evaluations = 0;
};

/// Owned labels of a single slice, x-fastest.
struct LabelSlice {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<Label> labels;

  Label at(std::size_t x, std::size_t y) const { return labels[x + nx * y]; }
};

/// Seeded background flood fill of one slice.
///
/// Every pixel starts INTERIOR. Pixels reached from the seed through pixels
/// below the isovalue become BACKGROUND; the first pixel at or above the
/// isovalue on each path becomes BOUNDARY and stops growth there. Throws
/// ConfigError when the seed is outside the slice or not below the isovalue.
LabelSlice segment_slice(const SliceView& slice, double isovalue, PixelCoord seed,
                         Connectivity connectivity, FillStats* stats = nullptr);

struct SegmentationResult {
  LabelGrid labels;
  IsovalueReport report;
  /// Slices that had no background seed and were left all INTERIOR.
  std::vector<std::size_t> seedless_slices;
};

/// subsample -> resolve_isovalue -> pad -> per-slice seed + flood fill.
SegmentationResult segment_volume(const Volume& volume, const SegmentationConfig& config);

/// Labels as a rawvol pair with dtype "u8".
void save_label_grid(const LabelGrid& grid, const std::filesystem::path& header);
LabelGrid load_label_grid(const std::filesystem::path& header);

}  // namespace skinseg::segmentation
