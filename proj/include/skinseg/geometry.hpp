#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace skinseg {

/// Point or vector in millimeter world space.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  constexpr double operator[](std::size_t axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Squared Euclidean distance. Every distance query in the library goes
/// through this one expression so results compare bit-exactly.
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

/// Axis-aligned box in world space, inclusive bounds.
struct Box {
  Vec3 min;
  Vec3 max;

  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

/// Voxel counts along x, y, z.
struct Dims {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;

  constexpr std::size_t count() const { return nx * ny * nz; }
  constexpr std::size_t operator[](std::size_t axis) const {
    return axis == 0 ? nx : (axis == 1 ? ny : nz);
  }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

/// Integer voxel index.
struct VoxelCoord {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;
  friend constexpr bool operator==(const VoxelCoord&, const VoxelCoord&) = default;
};

/// Per-axis integer factors (subsampling).
using AxisFactors = std::array<std::size_t, 3>;

/// Shape and placement of a voxel grid: dims, spacing (mm per voxel) and the
/// world position of the center of voxel (0, 0, 0). Storage is x-fastest.
struct GridGeometry {
  Dims dims;
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  constexpr std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims.nx * (y + dims.ny * z);
  }
  constexpr bool contains(const VoxelCoord& c) const {
    return c.x < dims.nx && c.y < dims.ny && c.z < dims.nz;
  }
  /// World position of a (possibly fractional) index-space point.
  constexpr Vec3 world(double x, double y, double z) const {
    return {origin.x + x * spacing.x, origin.y + y * spacing.y, origin.z + z * spacing.z};
  }
  double voxel_diagonal() const { return norm(spacing); }

  /// Throws ConfigError unless dims >= 1 and spacing > 0 (and finite).
  void validate() const;

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

}  // namespace skinseg
