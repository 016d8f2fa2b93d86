#include "skinseg/preprocess.hpp"

#include <cmath>
#include <string>

#include "skinseg/errors.hpp"

namespace skinseg::preprocess {

Volume normalize_intensities(const Volume& volume) {
  const auto [lo, hi] = volume.range();
  if (!(hi > lo)) {
    throw DegenerateVolumeError("degenerate intensity range: every sample equals " + std::to_string(lo));
  }
  const double min = lo;
  const double extent = static_cast<double>(hi) - min;
  std::vector<float> out(volume.data().size());
  const auto in = volume.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>((in[i] - min) / extent);
  }
  return Volume(volume.geometry(), std::move(out));
}

Volume gradient_norm(const Volume& volume) {
  const auto& d = volume.dims();
  if (d.nx < 2 || d.ny < 2 || d.nz < 2) {
    throw ConfigError("gradient needs at least 2 voxels along every axis");
  }
  const Vec3& s = volume.spacing();
  const std::size_t n[3] = {d.nx, d.ny, d.nz};
  const double h[3] = {s.x, s.y, s.z};
  const std::size_t stride[3] = {1, d.nx, d.nx * d.ny};
  const auto in = volume.data();

  std::vector<float> out(in.size());
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t i = volume.geometry().index(x, y, z);
        const std::size_t c[3] = {x, y, z};
        double sum = 0.0;
        for (int a = 0; a < 3; ++a) {
          double g;
          if (c[a] == 0) {
            g = (in[i + stride[a]] - static_cast<double>(in[i])) / h[a];
          } else if (c[a] + 1 == n[a]) {
            g = (in[i] - static_cast<double>(in[i - stride[a]])) / h[a];
          } else {
            g = (in[i + stride[a]] - static_cast<double>(in[i - stride[a]])) / (2.0 * h[a]);
          }
          sum += g * g;
        }
        out[i] = static_cast<float>(std::sqrt(sum));
      }
    }
  }
  return Volume(volume.geometry(), std::move(out));
}

Volume gradient_magnitude(const Volume& volume) { return normalize_intensities(gradient_norm(volume)); }

Volume pad_volume(const Volume& volume, std::size_t width, std::optional<float> fill) {
  if (width == 0) return volume;
  const float value = fill.value_or(volume.range().first);
  const auto& d = volume.dims();
  const auto& s = volume.spacing();
  const auto& o = volume.origin();
  const double w = static_cast<double>(width);

  GridGeometry padded;
  padded.dims = {d.nx + 2 * width, d.ny + 2 * width, d.nz + 2 * width};
  padded.spacing = s;
  padded.origin = {o.x - w * s.x, o.y - w * s.y, o.z - w * s.z};

  Volume out(padded, value);
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      const auto row = volume.data().subspan(volume.geometry().index(0, y, z), d.nx);
      std::copy(row.begin(), row.end(), out.data().begin() + padded.index(width, y + width, z + width));
    }
  }
  return out;
}

Volume subsample(const Volume& volume, const AxisFactors& factor) {
  for (std::size_t f : factor) {
    if (f < 1) throw ConfigError("subsample factor must be >= 1");
  }
  if (factor == AxisFactors{1, 1, 1}) return volume;
  const auto& d = volume.dims();
  const auto& s = volume.spacing();

  GridGeometry coarse;
  coarse.dims = {(d.nx - 1) / factor[0] + 1, (d.ny - 1) / factor[1] + 1, (d.nz - 1) / factor[2] + 1};
  coarse.spacing = {s.x * static_cast<double>(factor[0]), s.y * static_cast<double>(factor[1]),
                    s.z * static_cast<double>(factor[2])};
  coarse.origin = volume.origin();

  std::vector<float> out;
  out.reserve(coarse.dims.count());
  for (std::size_t z = 0; z < coarse.dims.nz; ++z) {
    for (std::size_t y = 0; y < coarse.dims.ny; ++y) {
      for (std::size_t x = 0; x < coarse.dims.nx; ++x) {
        out.push_back(volume.at(x * factor[0], y * factor[1], z * factor[2]));
      }
    }
  }
  return Volume(coarse, std::move(out));
}

}  // namespace skinseg::preprocess
