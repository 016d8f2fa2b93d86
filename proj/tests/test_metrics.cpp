#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "skinseg/errors.hpp"
#include "skinseg/metrics.hpp"
#include "test_support.hpp"

using namespace skinseg;
using namespace skinseg::metrics;
using skinseg::testing::brute_force_nearest;
using skinseg::testing::TempDir;

namespace {

std::vector<Vec3> random_points(std::mt19937_64& rng, std::size_t n, bool lattice) {
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<Vec3> out(n);
  for (auto& p : out) {
    if (lattice) {
      // Half-integral coordinates produce many exact ties.
      p = {0.5 * static_cast<double>(rng() % 20), 0.5 * static_cast<double>(rng() % 20),
           0.5 * static_cast<double>(rng() % 20)};
    } else {
      p = {u(rng), u(rng), u(rng)};
    }
  }
  return out;
}

}  // namespace

TEST_CASE("k-d tree nearest distances equal brute force bit for bit") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const bool lattice = trial % 2 == 1;
    const auto from = random_points(rng, 1 + rng() % 300, lattice);
    const auto to = random_points(rng, 1 + rng() % 500, lattice);
    const auto expected = brute_force_nearest(from, to);
    const auto report = directed_hausdorff(from, to);
    REQUIRE(report.per_vertex.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) REQUIRE(report.per_vertex[i] == expected[i]);
  }
}

TEST_CASE("identical point sets are at distance zero") {
  std::mt19937_64 rng(32);
  const auto pts = random_points(rng, 200, false);
  const auto report = directed_hausdorff(pts, pts);
  CHECK(report.hausdorff == 0.0);
  CHECK(report.mean == 0.0);
  CHECK(symmetric_hausdorff(std::span<const Vec3>(pts), std::span<const Vec3>(pts)) == 0.0);
}

TEST_CASE("directed distances are asymmetric") {
  const std::vector<Vec3> a{{0, 0, 0}};
  const std::vector<Vec3> b{{0, 0, 0}, {10, 0, 0}};
  const auto ab = directed_hausdorff(a, b, "a->b");
  const auto ba = directed_hausdorff(b, a, "b->a");
  CHECK(ab.hausdorff == 0.0);
  CHECK(ba.hausdorff == 10.0);
  CHECK(ba.direction == "b->a");
  CHECK(ba.per_vertex == std::vector<double>{0.0, 10.0});
  CHECK(symmetric_hausdorff(std::span<const Vec3>(a), std::span<const Vec3>(b)) == 10.0);
}

TEST_CASE("summary statistics order and nearest-rank percentiles") {
  std::vector<Vec3> from;
  for (int i = 1; i <= 100; ++i) from.push_back({static_cast<double>(i), 0, 0});
  const std::vector<Vec3> to{{0, 0, 0}};
  const auto r = directed_hausdorff(from, to);
  CHECK(r.hausdorff == 100.0);
  CHECK(r.mean == doctest::Approx(50.5));
  CHECK(r.p50 == 50.0);
  CHECK(r.p95 == 95.0);
  CHECK(r.p99 == 99.0);
  CHECK(r.p50 <= r.p95);
  CHECK(r.p95 <= r.p99);
  CHECK(r.p99 <= r.hausdorff);
  CHECK(r.mean <= r.hausdorff);
}

TEST_CASE("nearest-rank percentile edge cases") {
  const std::vector<double> one{4.0};
  CHECK(nearest_rank_percentile(one, 50.0) == 4.0);
  const std::vector<double> v{5.0, 1.0, 3.0, 2.0, 4.0};
  CHECK(nearest_rank_percentile(v, 100.0) == 5.0);
  CHECK(nearest_rank_percentile(v, 20.0) == 1.0);
  CHECK(nearest_rank_percentile(v, 21.0) == 2.0);
  CHECK_THROWS_AS(nearest_rank_percentile(v, 0.0), ConfigError);
  CHECK_THROWS_AS(nearest_rank_percentile(std::vector<double>{}, 50.0), EmptyPointSetError);
}

TEST_CASE("empty point sets are rejected") {
  const std::vector<Vec3> some{{1, 2, 3}};
  const std::vector<Vec3> none;
  CHECK_THROWS_AS(directed_hausdorff(some, none), EmptyPointSetError);
  CHECK_THROWS_AS(directed_hausdorff(none, some), EmptyPointSetError);
  CHECK_THROWS_AS(NearestNeighborIndex(none).nearest_squared({0, 0, 0}), EmptyPointSetError);
}

TEST_CASE("worker count does not change the report") {
  std::mt19937_64 rng(33);
  const auto from = random_points(rng, 1000, false);
  const auto to = random_points(rng, 800, false);
  const auto one = directed_hausdorff(from, to, "x", 1);
  const auto four = directed_hausdorff(from, to, "x", 4);
  CHECK(one.per_vertex == four.per_vertex);
  CHECK(one.mean == four.mean);
}

TEST_CASE("per-vertex export writes CSV rows and a JSON summary") {
  TempDir dir;
  const std::vector<Vec3> from{{0, 0, 0}, {3, 4, 0}};
  const std::vector<Vec3> to{{0, 0, 0}};
  const auto report = directed_hausdorff(from, to, "a->b");
  const auto json_path = export_per_vertex_scalars(report, dir / "d.csv");
  CHECK(json_path == dir / "d.json");
  CHECK(skinseg::testing::read_text(dir / "d.csv") == "vertex_index,distance_mm\n0,0\n1,5\n");
  const auto j = nlohmann::json::parse(skinseg::testing::read_text(json_path));
  CHECK(j.at("direction") == "a->b");
  CHECK(j.at("hausdorff_mm") == 5.0);
  CHECK(j.at("mean_mm") == 2.5);
  CHECK(j.at("vertex_count") == 2);
  for (const char* key : {"p50_mm", "p95_mm", "p99_mm"}) CHECK(j.contains(key));
}

TEST_CASE("CSV distances round-trip exactly") {
  TempDir dir;
  std::mt19937_64 rng(34);
  const auto from = random_points(rng, 50, false);
  const auto to = random_points(rng, 50, false);
  const auto report = directed_hausdorff(from, to);
  export_per_vertex_scalars(report, dir / "d.csv");
  std::istringstream in(skinseg::testing::read_text(dir / "d.csv"));
  std::string line;
  std::getline(in, line);
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    CHECK(std::stoul(line.substr(0, comma)) == i);
    CHECK(std::stod(line.substr(comma + 1)) == report.per_vertex[i]);
    ++i;
  }
  CHECK(i == 50);
}
