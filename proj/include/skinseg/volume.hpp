#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "skinseg/geometry.hpp"

namespace skinseg {

/// 3D scalar intensity grid with physical metadata.
///
/// Samples are stored x-fastest: index = x + nx * (y + ny * z). Construction
/// validates the geometry, the sample count and finiteness of every sample.
class Volume {
 public:
  Volume(GridGeometry geometry, std::vector<float> data);
  Volume(GridGeometry geometry, float fill);

  const GridGeometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims; }
  const Vec3& spacing() const { return geometry_.spacing; }
  const Vec3& origin() const { return geometry_.origin; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  float at(std::size_t x, std::size_t y, std::size_t z) const {
    return data_[geometry_.index(x, y, z)];
  }
  float& at(std::size_t x, std::size_t y, std::size_t z) { return data_[geometry_.index(x, y, z)]; }

  /// (min, max) over all samples.
  std::pair<float, float> range() const;

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  GridGeometry geometry_;
  std::vector<float> data_;
};

/// Read-only view of one x-y plane (or any nx by ny grid), x-fastest.
struct SliceView {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::span<const float> values;

  float at(std::size_t x, std::size_t y) const { return values[x + nx * y]; }
  std::size_t size() const { return nx * ny; }
};

/// The x-y plane at height z. Throws std::out_of_range when z >= nz.
SliceView slice_at(const Volume& volume, std::size_t z);

enum class VolumeFormat { nifti1, rawvol };

std::optional<VolumeFormat> parse_volume_format(std::string_view name);
std::string_view to_string(VolumeFormat format);

/// nifti1 for `.nii` / `.nii.gz`, rawvol otherwise.
VolumeFormat volume_format_from_path(const std::filesystem::path& path);

/// Binary payload path of a rawvol header: the header path with its
/// extension replaced by `.raw`.
std::filesystem::path rawvol_data_path(const std::filesystem::path& header);

/// Loads NIfTI-1 (optionally gzip-compressed) or rawvol into float samples.
Volume load_volume(const std::filesystem::path& path, VolumeFormat format);

/// Writes a rawvol header and payload. Only rawvol is writable.
void save_volume(const Volume& volume, const std::filesystem::path& path,
                 VolumeFormat format = VolumeFormat::rawvol);

}  // namespace skinseg
