#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "skinseg/geometry.hpp"
#include "skinseg/volume.hpp"

namespace skinseg::phantom {

struct Sphere {
  Vec3 center;
  double radius = 0.0;
};

/// Axis-aligned block body.
struct Block {
  Box extent;
};

/// Axis-aligned ellipsoid body resting above a rectangular slab (the bed).
/// The slab lies on the -y side of the body and must not overlap it.
struct BodyWithBed {
  Vec3 body_center;
  Vec3 body_radii;
  Box bed;
};

/// Sphere that extends past at least one face of the volume.
struct BorderTouchingSphere {
  Vec3 center;
  double radius = 0.0;
};

using Shape = std::variant<Sphere, Block, BodyWithBed, BorderTouchingSphere>;

std::string_view kind_name(const Shape& shape);

struct PhantomSpec {
  Shape shape;
  GridGeometry grid;
  float body_intensity = 1.0f;
  float background_intensity = 0.0f;
  /// Half-width of the uniform additive noise, 0 for none.
  float noise_amplitude = 0.0f;

  /// Throws ConfigError on inconsistent intensities, noise or shapes that do
  /// not fit the volume.
  void validate() const;
};

/// Analytic description of the phantom surface.
class GroundTruth {
 public:
  explicit GroundTruth(Shape shape) : shape_(std::move(shape)) {}

  const Shape& shape() const { return shape_; }

  bool inside(const Vec3& p) const;

  /// Exact distance (mm) from `p` to the body surface. For BodyWithBed this is
  /// the boundary of the union of body and bed.
  double surface_distance(const Vec3& p) const;

  nlohmann::ordered_json to_json() const;

 private:
  Shape shape_;
};

struct Phantom {
  Volume volume;
  GroundTruth truth;
};

/// Voxels whose centers fall inside the shape take the body intensity, the
/// rest the background, then seeded uniform noise is added.
Phantom generate(const PhantomSpec& spec, std::uint64_t seed);

/// Sphere of `radius` mm centered in an n^3 grid with the given spacing.
PhantomSpec centered_sphere(std::size_t n, double radius, double spacing = 1.0);

/// Distance from a point to the surface of an axis-aligned ellipsoid.
double ellipsoid_distance(const Vec3& center, const Vec3& radii, const Vec3& p);

/// Distance from a point to the surface of a box.
double box_distance(const Box& box, const Vec3& p);

}  // namespace skinseg::phantom
