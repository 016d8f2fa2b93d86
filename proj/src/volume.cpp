#include "skinseg/volume.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "endian.hpp"
#include "nifti.hpp"
#include "rawvol.hpp"
#include "skinseg/errors.hpp"

namespace skinseg {

void GridGeometry::validate() const {
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) {
    throw ConfigError("grid dims must all be >= 1");
  }
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw ConfigError("grid spacing must be finite and > 0");
    }
    if (!std::isfinite(origin[a])) throw ConfigError("grid origin must be finite");
  }
}

Volume::Volume(GridGeometry geometry, std::vector<float> data)
    : geometry_(geometry), data_(std::move(data)) {
  geometry_.validate();
  if (data_.size() != geometry_.dims.count()) {
    throw ConfigError("volume holds " + std::to_string(data_.size()) + " samples, dims imply " +
                      std::to_string(geometry_.dims.count()));
  }
  const auto bad = std::count_if(data_.begin(), data_.end(), [](float v) { return !std::isfinite(v); });
  if (bad != 0) {
    throw ConfigError("volume contains " + std::to_string(bad) + " non-finite samples");
  }
}

Volume::Volume(GridGeometry geometry, float fill)
    : Volume(geometry, std::vector<float>(geometry.dims.count(), fill)) {}

std::pair<float, float> Volume::range() const {
  const auto [lo, hi] = std::minmax_element(data_.begin(), data_.end());
  return {*lo, *hi};
}

SliceView slice_at(const Volume& volume, std::size_t z) {
  const auto& d = volume.dims();
  if (z >= d.nz) {
    throw std::out_of_range("slice index " + std::to_string(z) + " out of range [0, " +
                            std::to_string(d.nz) + ")");
  }
  const std::size_t plane = d.nx * d.ny;
  return {d.nx, d.ny, volume.data().subspan(z * plane, plane)};
}

std::optional<VolumeFormat> parse_volume_format(std::string_view name) {
  if (name == "nifti1" || name == "nifti") return VolumeFormat::nifti1;
  if (name == "rawvol") return VolumeFormat::rawvol;
  return std::nullopt;
}

std::string_view to_string(VolumeFormat format) {
  return format == VolumeFormat::nifti1 ? "nifti1" : "rawvol";
}

VolumeFormat volume_format_from_path(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  const auto ends_with = [&](std::string_view suffix) {
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with(".nii") || ends_with(".nii.gz") ? VolumeFormat::nifti1 : VolumeFormat::rawvol;
}

std::filesystem::path rawvol_data_path(const std::filesystem::path& header) {
  auto data = header;
  data.replace_extension(".raw");
  return data;
}

namespace {

Volume load_rawvol(const std::filesystem::path& path) {
  const auto header = detail::read_rawvol_header(path);
  const auto payload = detail::read_rawvol_payload(path, header);
  std::vector<float> data(header.geometry.dims.count());
  if (header.dtype == detail::RawDtype::f32) {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = detail::load_bytes<float>(&payload[i * 4]);
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(std::to_integer<unsigned>(payload[i]));
  }
  const auto bad = std::count_if(data.begin(), data.end(), [](float v) { return !std::isfinite(v); });
  if (bad != 0) {
    throw ParseError("'" + path.string() + "' contains " + std::to_string(bad) + " non-finite values");
  }
  return Volume(header.geometry, std::move(data));
}

}  // namespace

Volume load_volume(const std::filesystem::path& path, VolumeFormat format) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: '" + path.string() + "'");
  return format == VolumeFormat::nifti1 ? detail::load_nifti(path) : load_rawvol(path);
}

void save_volume(const Volume& volume, const std::filesystem::path& path, VolumeFormat format) {
  if (format != VolumeFormat::rawvol) throw ConfigError("only rawvol volumes can be written");
  const auto values = volume.data();
  std::vector<std::byte> payload(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) detail::store_le(&payload[i * 4], values[i]);
  detail::write_rawvol(path, {volume.geometry(), detail::RawDtype::f32}, payload);
}

}  // namespace skinseg
