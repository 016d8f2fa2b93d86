#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "skinseg/errors.hpp"
#include "skinseg/phantom.hpp"
#include "skinseg/segmentation.hpp"
#include "test_support.hpp"

using namespace skinseg;
using namespace skinseg::segmentation;
using skinseg::testing::Image;

namespace {

Image image_from(std::size_t nx, std::size_t ny, std::initializer_list<float> values) {
  Image img{nx, ny, std::vector<float>(values)};
  REQUIRE(img.values.size() == nx * ny);
  return img;
}

std::size_t count(const LabelSlice& s, Label label) {
  return static_cast<std::size_t>(std::count(s.labels.begin(), s.labels.end(), label));
}

}  // namespace

TEST_CASE("all pixels below the isovalue become background") {
  const Image img{5, 4, std::vector<float>(20, 0.0f)};
  FillStats stats;
  const auto s = segment_slice(img.view(), 0.1, {0, 0}, Connectivity::four, &stats);
  CHECK(count(s, Label::background) == 20);
  CHECK(stats.evaluations == 20);
}

TEST_CASE("a closed ring encloses interior pixels") {
  // 5x5 with a one-pixel ring of high values around the center pixel.
  const Image img = image_from(5, 5, {0, 0, 0, 0, 0,
                                      0, 1, 1, 1, 0,
                                      0, 1, 0, 1, 0,
                                      0, 1, 1, 1, 0,
                                      0, 0, 0, 0, 0});
  for (auto conn : {Connectivity::four, Connectivity::eight}) {
    const auto s = segment_slice(img.view(), 0.5, {0, 0}, conn);
    CHECK(count(s, Label::background) == 16);
    CHECK(count(s, Label::boundary) == 8);
    CHECK(s.at(2, 2) == Label::interior);
  }
}

TEST_CASE("a diagonal gap leaks under 8-connectivity only") {
  const Image img = image_from(5, 5, {0, 0, 0, 0, 0,
                                      0, 1, 1, 0, 0,
                                      0, 1, 0, 1, 0,
                                      0, 1, 1, 1, 0,
                                      0, 0, 0, 0, 0});
  CHECK(segment_slice(img.view(), 0.5, {0, 0}, Connectivity::four).at(2, 2) == Label::interior);
  CHECK(segment_slice(img.view(), 0.5, {0, 0}, Connectivity::eight).at(2, 2) == Label::background);
}

TEST_CASE("thresholding is at-or-above for boundary") {
  const Image img = image_from(3, 1, {0.0f, 0.5f, 0.0f});
  const auto s = segment_slice(img.view(), 0.5, {0, 0}, Connectivity::four);
  CHECK(s.at(1, 0) == Label::boundary);
  CHECK(s.at(2, 0) == Label::interior);
}

TEST_CASE("flood fill matches the union-find oracle on random slices") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t nx = 1 + rng() % 16;
    const std::size_t ny = 1 + rng() % 16;
    const bool binary = trial % 2 == 0;
    Image img = skinseg::testing::random_image(rng, nx, ny, binary, 0.2 + 0.05 * (trial % 10));
    const double iso = binary ? 0.5 : 0.1 + 0.8 * ((rng() % 1000) / 1000.0);
    img.at(0, 0) = 0.0f;
    const auto conn = trial % 3 == 0 ? Connectivity::eight : Connectivity::four;
    FillStats stats;
    const auto got = segment_slice(img.view(), iso, {0, 0}, conn, &stats);
    const auto want = skinseg::testing::oracle_labels(img.view(), iso, {0, 0}, conn);
    REQUIRE(got.labels == want);
    // Every reached pixel is compared exactly once.
    CHECK(stats.evaluations == count(got, Label::background) + count(got, Label::boundary));
  }
}

TEST_CASE("seed scan order follows the corners") {
  Image img{4, 3, std::vector<float>(12, 1.0f)};
  CHECK_THROWS_AS(select_seed(img.view(), 0.5), NoSeedError);
  img.at(3, 2) = 0.0f;
  CHECK(select_seed(img.view(), 0.5) == PixelCoord{3, 2});
  img.at(0, 2) = 0.0f;
  CHECK(select_seed(img.view(), 0.5) == PixelCoord{0, 2});
  img.at(3, 0) = 0.0f;
  CHECK(select_seed(img.view(), 0.5) == PixelCoord{3, 0});
  img.at(0, 0) = 0.0f;
  CHECK(select_seed(img.view(), 0.5) == PixelCoord{0, 0});
}

TEST_CASE("invalid seeds are rejected") {
  const Image img = image_from(2, 2, {0, 1, 1, 1});
  CHECK_THROWS_AS(segment_slice(img.view(), 0.5, {1, 0}, Connectivity::four), ConfigError);
  CHECK_THROWS_AS(segment_slice(img.view(), 0.5, {2, 0}, Connectivity::four), ConfigError);
}

TEST_CASE("configuration validation") {
  SegmentationConfig c;
  CHECK_NOTHROW(c.validate());
  c.isovalue.value = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.isovalue.value = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.subsample_factor = {1, 0, 1};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.workers = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("isovalue defaults and report") {
  CHECK(IsovalueStrategy::fixed().value == 0.1);
  CHECK(IsovalueStrategy::gradient().value == 0.01);
  const auto phantom = phantom::generate(phantom::centered_sphere(16, 5.0), 0);
  const auto fixed = resolve_isovalue(phantom.volume, IsovalueStrategy::fixed());
  CHECK(fixed.report == IsovalueReport{IsovalueStrategy::Kind::fixed, 0.1, false});
  const auto grad = resolve_isovalue(phantom.volume, IsovalueStrategy::gradient());
  CHECK(grad.report == IsovalueReport{IsovalueStrategy::Kind::gradient, 0.01, true});
  CHECK(grad.volume.range() == std::pair{0.0f, 1.0f});
}

TEST_CASE("constant volumes are degenerate") {
  GridGeometry g;
  g.dims = {4, 4, 4};
  CHECK_THROWS_AS(segment_volume(Volume(g, 3.0f), {}), DegenerateVolumeError);
}

TEST_CASE("sphere phantom: interior plus boundary approximates the ball") {
  const double r = 10.0;
  const auto phantom = phantom::generate(phantom::centered_sphere(32, r), 0);
  const auto result = segment_volume(phantom.volume, {});
  CHECK(result.seedless_slices.empty());
  CHECK(result.labels.dims() == Dims{34, 34, 34});
  const double body = static_cast<double>(result.labels.count(Label::interior) + result.labels.count(Label::boundary));
  CHECK(body == doctest::Approx(4.0 / 3.0 * std::numbers::pi * r * r * r).epsilon(0.03));
  // Every body voxel is inside the sphere, background voxels outside.
  const auto& g = result.labels.geometry();
  for (std::size_t z = 0; z < 34; ++z) {
    for (std::size_t y = 0; y < 34; ++y) {
      for (std::size_t x = 0; x < 34; ++x) {
        const bool inside = phantom.truth.inside(g.world(double(x), double(y), double(z)));
        CHECK(inside == (result.labels.at(x, y, z) != Label::background));
      }
    }
  }
}

TEST_CASE("worker count does not change the labels") {
  const auto phantom = phantom::generate(phantom::centered_sphere(24, 8.0), 0);
  SegmentationConfig one;
  SegmentationConfig many;
  many.workers = 3;
  CHECK(segment_volume(phantom.volume, one).labels == segment_volume(phantom.volume, many).labels);
}

TEST_CASE("slices without a seed stay interior and are reported") {
  GridGeometry g;
  g.dims = {4, 4, 3};
  std::vector<float> data(g.dims.count(), 0.0f);
  for (std::size_t i = 16; i < 32; ++i) data[i] = 1.0f;
  SegmentationConfig c;
  c.pad_width = 0;
  const auto result = segment_volume(Volume(g, data), c);
  CHECK(result.seedless_slices == std::vector<std::size_t>{1});
  for (Label l : result.labels.slice(1)) CHECK(l == Label::interior);
  for (Label l : result.labels.slice(0)) CHECK(l == Label::background);
}

TEST_CASE("explicit seeds map through subsampling and padding") {
  GridGeometry g;
  g.dims = {8, 8, 2};
  std::vector<float> data(g.dims.count(), 1.0f);
  // Low-intensity pocket in the middle of each slice, unreachable from corners.
  for (std::size_t z = 0; z < 2; ++z) {
    for (std::size_t y = 3; y < 5; ++y) {
      for (std::size_t x = 3; x < 5; ++x) data[g.index(x, y, z)] = 0.0f;
    }
  }
  SegmentationConfig c;
  c.pad_width = 0;
  c.seed.explicit_seed = VoxelCoord{4, 4, 0};
  const auto result = segment_volume(Volume(g, data), c);
  CHECK(result.seedless_slices.empty());
  CHECK(result.labels.at(3, 3, 1) == Label::background);
  CHECK(result.labels.at(0, 0, 0) == Label::interior);
  CHECK(result.labels.at(2, 3, 0) == Label::boundary);

  c.seed.explicit_seed = VoxelCoord{8, 0, 0};
  CHECK_THROWS_AS(segment_volume(Volume(g, data), c), ConfigError);
}

TEST_CASE("subsampling shrinks the label grid") {
  const auto phantom = phantom::generate(phantom::centered_sphere(33, 10.0), 0);
  SegmentationConfig c;
  c.subsample_factor = {2, 2, 2};
  const auto result = segment_volume(phantom.volume, c);
  CHECK(result.labels.dims() == Dims{19, 19, 19});
  CHECK(result.labels.geometry().spacing == Vec3{2, 2, 2});
}
