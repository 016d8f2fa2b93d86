#include "skinseg/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "skinseg/errors.hpp"

namespace skinseg::phantom {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr int kMaxBisections = 1100;

double robust_length(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  if (m == 0.0) return 0.0;
  return m * std::hypot(a / m, b / m);
}

double robust_length(double a, double b, double c) {
  const double m = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (m == 0.0) return 0.0;
  const double x = a / m, y = b / m, z = c / m;
  return m * std::sqrt(x * x + y * y + z * z);
}

// Root of (r0 z0 / (s + r0))^2 + (z1 / (s + 1))^2 - 1 by bisection.
double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : robust_length(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < kMaxBisections; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double a = n0 / (s + r0);
    const double b = z1 / (s + 1.0);
    const double f = a * a + b * b - 1.0;
    if (f > 0.0) {
      s0 = s;
    } else if (f < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

double ellipsoid_root(double r0, double r1, double z0, double z1, double z2, double g) {
  const double n0 = r0 * z0;
  const double n1 = r1 * z1;
  double s0 = z2 - 1.0;
  double s1 = g < 0.0 ? 0.0 : robust_length(n0, n1, z2) - 1.0;
  double s = 0.0;
  for (int i = 0; i < kMaxBisections; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double a = n0 / (s + r0);
    const double b = n1 / (s + r1);
    const double c = z2 / (s + 1.0);
    const double f = a * a + b * b + c * c - 1.0;
    if (f > 0.0) {
      s0 = s;
    } else if (f < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

// First-quadrant point (y0, y1 >= 0) against an ellipse with e0 >= e1 > 0.
double ellipse_distance(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0;
      const double z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double s = ellipse_root(r0, z0, z1, g);
      const double x0 = r0 * y0 / (s + r0);
      const double x1 = y1 / (s + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - e1);
  }
  const double numer0 = e0 * y0;
  const double denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0;
    const double x1 = e1 * std::sqrt(1.0 - xde0 * xde0);
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

// First-octant point against an ellipsoid with e0 >= e1 >= e2 > 0.
double sorted_ellipsoid_distance(double e0, double e1, double e2, double y0, double y1, double y2) {
  if (y2 > 0.0) {
    if (y1 > 0.0) {
      if (y0 > 0.0) {
        const double z0 = y0 / e0, z1 = y1 / e1, z2 = y2 / e2;
        const double g = z0 * z0 + z1 * z1 + z2 * z2 - 1.0;
        if (g == 0.0) return 0.0;
        const double r0 = (e0 / e2) * (e0 / e2);
        const double r1 = (e1 / e2) * (e1 / e2);
        const double s = ellipsoid_root(r0, r1, z0, z1, z2, g);
        const double x0 = r0 * y0 / (s + r0);
        const double x1 = r1 * y1 / (s + r1);
        const double x2 = y2 / (s + 1.0);
        const double d0 = x0 - y0, d1 = x1 - y1, d2 = x2 - y2;
        return std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
      }
      return ellipse_distance(e1, e2, y1, y2);
    }
    if (y0 > 0.0) return ellipse_distance(e0, e2, y0, y2);
    return std::abs(y2 - e2);
  }
  const double denom0 = e0 * e0 - e2 * e2;
  const double denom1 = e1 * e1 - e2 * e2;
  const double numer0 = e0 * y0;
  const double numer1 = e1 * y1;
  if (numer0 < denom0 && numer1 < denom1) {
    const double xde0 = numer0 / denom0;
    const double xde1 = numer1 / denom1;
    const double discr = 1.0 - xde0 * xde0 - xde1 * xde1;
    if (discr > 0.0) {
      const double x0 = e0 * xde0, x1 = e1 * xde1, x2 = e2 * std::sqrt(discr);
      const double d0 = x0 - y0, d1 = x1 - y1;
      return std::sqrt(d0 * d0 + d1 * d1 + x2 * x2);
    }
  }
  return ellipse_distance(e0, e1, y0, y1);
}

Box world_extent(const GridGeometry& g) {
  return {g.origin, g.world(static_cast<double>(g.dims.nx - 1), static_cast<double>(g.dims.ny - 1),
                            static_cast<double>(g.dims.nz - 1))};
}

bool box_within(const Box& inner, const Box& outer) {
  return outer.contains(inner.min) && outer.contains(inner.max);
}

bool valid_box(const Box& b) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (!std::isfinite(b.min[a]) || !std::isfinite(b.max[a]) || b.min[a] > b.max[a]) return false;
  }
  return true;
}

bool finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

Box sphere_bounds(const Vec3& c, double r) { return {{c.x - r, c.y - r, c.z - r}, {c.x + r, c.y + r, c.z + r}}; }

nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x, v.y, v.z}; }

}  // namespace

double ellipsoid_distance(const Vec3& center, const Vec3& radii, const Vec3& p) {
  std::array<std::pair<double, double>, 3> axes = {{{radii.x, std::abs(p.x - center.x)},
                                                     {radii.y, std::abs(p.y - center.y)},
                                                     {radii.z, std::abs(p.z - center.z)}}};
  std::sort(axes.begin(), axes.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  return sorted_ellipsoid_distance(axes[0].first, axes[1].first, axes[2].first, axes[0].second,
                                   axes[1].second, axes[2].second);
}

double box_distance(const Box& box, const Vec3& p) {
  if (box.contains(p)) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < 3; ++a) best = std::min({best, p[a] - box.min[a], box.max[a] - p[a]});
    return best;
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    const double d = std::max({box.min[a] - p[a], 0.0, p[a] - box.max[a]});
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::string_view kind_name(const Shape& shape) {
  return std::visit(Overloaded{
                        [](const Sphere&) { return std::string_view("sphere"); },
                        [](const Block&) { return std::string_view("box"); },
                        [](const BodyWithBed&) { return std::string_view("body_with_bed"); },
                        [](const BorderTouchingSphere&) { return std::string_view("border_touching_sphere"); },
                    },
                    shape);
}

void PhantomSpec::validate() const {
  grid.validate();
  if (!(body_intensity > background_intensity)) {
    throw ConfigError("phantom body intensity must exceed the background intensity");
  }
  if (!(noise_amplitude >= 0.0f) ||
      !(static_cast<double>(noise_amplitude) < (static_cast<double>(body_intensity) - background_intensity) / 4.0)) {
    throw ConfigError("phantom noise amplitude must lie in [0, (body - background) / 4)");
  }
  const Box extent = world_extent(grid);
  std::visit(Overloaded{
                 [&](const Sphere& s) {
                   if (!finite(s.center) || !(s.radius >= 0.0) || !std::isfinite(s.radius)) {
                     throw ConfigError("sphere needs a finite center and radius >= 0");
                   }
                   if (!box_within(sphere_bounds(s.center, s.radius), extent)) {
                     throw ConfigError("sphere exceeds the volume");
                   }
                 },
                 [&](const Block& b) {
                   if (!valid_box(b.extent)) throw ConfigError("box corners must be finite with min <= max");
                   if (!box_within(b.extent, extent)) throw ConfigError("box exceeds the volume");
                 },
                 [&](const BodyWithBed& b) {
                   if (!finite(b.body_center) || !finite(b.body_radii) || !(b.body_radii.x > 0.0) ||
                       !(b.body_radii.y > 0.0) || !(b.body_radii.z > 0.0)) {
                     throw ConfigError("body needs a finite center and positive radii");
                   }
                   const Box body{b.body_center - b.body_radii, b.body_center + b.body_radii};
                   if (!box_within(body, extent)) throw ConfigError("body exceeds the volume");
                   if (!valid_box(b.bed)) throw ConfigError("bed corners must be finite with min <= max");
                   if (!box_within(b.bed, extent)) throw ConfigError("bed exceeds the volume");
                   if (b.bed.max.y > body.min.y) throw ConfigError("bed must lie below the body (-y) without overlap");
                 },
                 [&](const BorderTouchingSphere& s) {
                   if (!finite(s.center) || !(s.radius > 0.0) || !std::isfinite(s.radius)) {
                     throw ConfigError("sphere needs a finite center and radius > 0");
                   }
                   if (!extent.contains(s.center)) throw ConfigError("sphere center must lie inside the volume");
                   bool touches = false;
                   for (std::size_t a = 0; a < 3; ++a) {
                     touches = touches || s.center[a] - s.radius <= extent.min[a] ||
                               s.center[a] + s.radius >= extent.max[a];
                   }
                   if (!touches) throw ConfigError("border-touching sphere must reach at least one volume face");
                 },
             },
             shape);
}

bool GroundTruth::inside(const Vec3& p) const {
  const auto in_ellipsoid = [&](const Vec3& c, const Vec3& r) {
    const double u = (p.x - c.x) / r.x, v = (p.y - c.y) / r.y, w = (p.z - c.z) / r.z;
    return u * u + v * v + w * w < 1.0;
  };
  return std::visit(Overloaded{
                        [&](const Sphere& s) { return squared_distance(p, s.center) < s.radius * s.radius; },
                        [&](const Block& b) { return b.extent.contains(p); },
                        [&](const BodyWithBed& b) {
                          return in_ellipsoid(b.body_center, b.body_radii) || b.bed.contains(p);
                        },
                        [&](const BorderTouchingSphere& s) {
                          return squared_distance(p, s.center) < s.radius * s.radius;
                        },
                    },
                    shape_);
}

double GroundTruth::surface_distance(const Vec3& p) const {
  return std::visit(Overloaded{
                        [&](const Sphere& s) { return std::abs(norm(p - s.center) - s.radius); },
                        [&](const Block& b) { return box_distance(b.extent, p); },
                        // Body and bed are disjoint, so the union boundary is
                        // the union of both boundaries.
                        [&](const BodyWithBed& b) {
                          return std::min(ellipsoid_distance(b.body_center, b.body_radii, p), box_distance(b.bed, p));
                        },
                        [&](const BorderTouchingSphere& s) { return std::abs(norm(p - s.center) - s.radius); },
                    },
                    shape_);
}

nlohmann::ordered_json GroundTruth::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(shape_);
  std::visit(Overloaded{
                 [&](const Sphere& s) {
                   j["center_mm"] = vec_json(s.center);
                   j["radius_mm"] = s.radius;
                 },
                 [&](const Block& b) {
                   j["min_mm"] = vec_json(b.extent.min);
                   j["max_mm"] = vec_json(b.extent.max);
                 },
                 [&](const BodyWithBed& b) {
                   j["body_center_mm"] = vec_json(b.body_center);
                   j["body_radii_mm"] = vec_json(b.body_radii);
                   j["bed_min_mm"] = vec_json(b.bed.min);
                   j["bed_max_mm"] = vec_json(b.bed.max);
                 },
                 [&](const BorderTouchingSphere& s) {
                   j["center_mm"] = vec_json(s.center);
                   j["radius_mm"] = s.radius;
                 },
             },
             shape_);
  return j;
}

Phantom generate(const PhantomSpec& spec, std::uint64_t seed) {
  spec.validate();
  GroundTruth truth(spec.shape);
  const auto& g = spec.grid;
  std::vector<float> data(g.dims.count());
  std::mt19937_64 rng(seed);
  const double amplitude = spec.noise_amplitude;
  for (std::size_t z = 0; z < g.dims.nz; ++z) {
    for (std::size_t y = 0; y < g.dims.ny; ++y) {
      for (std::size_t x = 0; x < g.dims.nx; ++x) {
        const Vec3 p = g.world(static_cast<double>(x), static_cast<double>(y), static_cast<double>(z));
        double v = truth.inside(p) ? spec.body_intensity : spec.background_intensity;
        if (amplitude > 0.0) {
          // 53 random bits -> [0, 1); avoids implementation-defined distributions.
          const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
          v += amplitude * (2.0 * u - 1.0);
        }
        data[g.index(x, y, z)] = static_cast<float>(v);
      }
    }
  }
  return {Volume(g, std::move(data)), std::move(truth)};
}

PhantomSpec centered_sphere(std::size_t n, double radius, double spacing) {
  PhantomSpec spec;
  spec.grid.dims = {n, n, n};
  spec.grid.spacing = {spacing, spacing, spacing};
  const double c = 0.5 * static_cast<double>(n - 1) * spacing;
  spec.shape = Sphere{{c, c, c}, radius};
  return spec;
}

}  // namespace skinseg::phantom
