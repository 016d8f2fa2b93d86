#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "skinseg/errors.hpp"
#include "skinseg/preprocess.hpp"

using namespace skinseg;
using namespace skinseg::preprocess;

namespace {

Volume random_volume(std::mt19937_64& rng, Dims dims) {
  GridGeometry g;
  g.dims = dims;
  g.spacing = {0.5 + (rng() % 8) / 4.0, 0.5 + (rng() % 8) / 4.0, 0.5 + (rng() % 8) / 4.0};
  g.origin = {-3.0, 1.5, 7.0};
  std::uniform_real_distribution<float> u(-50.0f, 250.0f);
  std::vector<float> data(dims.count());
  for (auto& v : data) v = u(rng);
  return Volume(g, data);
}

}  // namespace

TEST_CASE("normalization maps min to 0 and max to 1 affinely") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Volume v = random_volume(rng, {2 + rng() % 5, 2 + rng() % 5, 1 + rng() % 5});
    const Volume n = normalize_intensities(v);
    const auto [lo, hi] = v.range();
    float nlo = 2.0f, nhi = -1.0f;
    for (std::size_t i = 0; i < v.data().size(); ++i) {
      const double expected = (static_cast<double>(v.data()[i]) - lo) / (static_cast<double>(hi) - lo);
      CHECK(n.data()[i] == doctest::Approx(expected).epsilon(1e-6));
      nlo = std::min(nlo, n.data()[i]);
      nhi = std::max(nhi, n.data()[i]);
    }
    CHECK(nlo == 0.0f);
    CHECK(nhi == 1.0f);
    CHECK(n.geometry() == v.geometry());
  }
}

TEST_CASE("normalization is invariant to positive affine intensity maps") {
  std::mt19937_64 rng(12);
  const Volume v = random_volume(rng, {4, 4, 4});
  std::vector<float> scaled(v.data().begin(), v.data().end());
  for (auto& f : scaled) f = 3.0f * f + 100.0f;
  const Volume a = normalize_intensities(v);
  const Volume b = normalize_intensities(Volume(v.geometry(), scaled));
  for (std::size_t i = 0; i < scaled.size(); ++i) CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-5));
}

TEST_CASE("constant volumes are degenerate") {
  GridGeometry g;
  g.dims = {3, 3, 3};
  CHECK_THROWS_AS(normalize_intensities(Volume(g, 7.0f)), DegenerateVolumeError);
  CHECK_THROWS_AS(gradient_magnitude(Volume(g, 7.0f)), DegenerateVolumeError);
}

TEST_CASE("gradient of a linear ramp is its slope everywhere") {
  GridGeometry g;
  g.dims = {5, 4, 3};
  g.spacing = {0.5, 2.0, 1.25};
  g.origin = {10.0, -4.0, 0.0};
  const double a = 3.0, b = -1.5, c = 0.25;
  std::vector<float> data(g.dims.count());
  for (std::size_t z = 0; z < 3; ++z) {
    for (std::size_t y = 0; y < 4; ++y) {
      for (std::size_t x = 0; x < 5; ++x) {
        const Vec3 p = g.world(static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)) - g.origin;
        data[g.index(x, y, z)] = static_cast<float>(a * p.x + b * p.y + c * p.z);
      }
    }
  }
  const Volume grad = gradient_norm(Volume(g, data));
  const double expected = std::sqrt(a * a + b * b + c * c);
  for (float f : grad.data()) CHECK(f == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("gradient of a step uses central differences inside and one-sided at faces") {
  GridGeometry g;
  g.dims = {4, 2, 2};
  std::vector<float> data(g.dims.count(), 0.0f);
  for (std::size_t z = 0; z < 2; ++z) {
    for (std::size_t y = 0; y < 2; ++y) {
      data[g.index(2, y, z)] = 1.0f;
      data[g.index(3, y, z)] = 1.0f;
    }
  }
  const Volume grad = gradient_norm(Volume(g, data));
  CHECK(grad.at(0, 0, 0) == 0.0f);
  CHECK(grad.at(1, 0, 0) == 0.5f);
  CHECK(grad.at(2, 0, 0) == 0.5f);
  CHECK(grad.at(3, 1, 1) == 0.0f);
}

TEST_CASE("gradient magnitude is normalized") {
  std::mt19937_64 rng(13);
  const Volume v = random_volume(rng, {5, 5, 5});
  const Volume gm = gradient_magnitude(v);
  const auto [lo, hi] = gm.range();
  CHECK(lo == 0.0f);
  CHECK(hi == 1.0f);
}

TEST_CASE("gradient rejects single-sample axes") {
  GridGeometry g;
  g.dims = {4, 4, 1};
  std::vector<float> data(16);
  for (std::size_t i = 0; i < 16; ++i) data[i] = static_cast<float>(i);
  CHECK_THROWS_AS(gradient_norm(Volume(g, data)), ConfigError);
}

TEST_CASE("padding grows dims, keeps world positions and fills with the minimum") {
  std::mt19937_64 rng(14);
  for (std::size_t w : {0u, 1u, 3u}) {
    const Volume v = random_volume(rng, {3, 4, 2});
    const Volume p = pad_volume(v, w);
    CHECK(p.dims() == Dims{3 + 2 * w, 4 + 2 * w, 2 + 2 * w});
    CHECK(p.spacing() == v.spacing());
    const float lo = v.range().first;
    for (std::size_t z = 0; z < p.dims().nz; ++z) {
      for (std::size_t y = 0; y < p.dims().ny; ++y) {
        for (std::size_t x = 0; x < p.dims().nx; ++x) {
          const bool inner = x >= w && y >= w && z >= w && x < 3 + w && y < 4 + w && z < 2 + w;
          if (inner) {
            CHECK(p.at(x, y, z) == v.at(x - w, y - w, z - w));
            const Vec3 pw = p.geometry().world(double(x), double(y), double(z));
            const Vec3 vw = v.geometry().world(double(x - w), double(y - w), double(z - w));
            CHECK(pw.x == doctest::Approx(vw.x));
            CHECK(pw.y == doctest::Approx(vw.y));
            CHECK(pw.z == doctest::Approx(vw.z));
          } else {
            CHECK(p.at(x, y, z) == lo);
          }
        }
      }
    }
  }
}

TEST_CASE("padding honours an explicit fill value") {
  GridGeometry g;
  g.dims = {1, 1, 1};
  const Volume p = pad_volume(Volume(g, 5.0f), 1, -2.0f);
  CHECK(p.dims() == Dims{3, 3, 3});
  CHECK(p.at(1, 1, 1) == 5.0f);
  CHECK(p.at(0, 0, 0) == -2.0f);
  CHECK(p.range().first == -2.0f);
}

TEST_CASE("subsampling keeps every f-th voxel and scales spacing") {
  std::mt19937_64 rng(15);
  const Volume v = random_volume(rng, {7, 6, 5});
  const Volume s = subsample(v, {2, 3, 1});
  CHECK(s.dims() == Dims{4, 2, 5});
  CHECK(s.spacing() == Vec3{v.spacing().x * 2, v.spacing().y * 3, v.spacing().z});
  CHECK(s.origin() == v.origin());
  for (std::size_t z = 0; z < 5; ++z) {
    for (std::size_t y = 0; y < 2; ++y) {
      for (std::size_t x = 0; x < 4; ++x) CHECK(s.at(x, y, z) == v.at(2 * x, 3 * y, z));
    }
  }
  CHECK(subsample(v, {1, 1, 1}) == v);
  CHECK_THROWS_AS(subsample(v, {0, 1, 1}), ConfigError);
}
