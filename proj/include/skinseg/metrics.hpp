#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skinseg/geometry.hpp"
#include "skinseg/surface.hpp"

namespace skinseg::metrics {

/// Exact nearest-neighbour index over a fixed point set (k-d tree).
///
/// Queries return the same value the brute-force double loop over
/// squared_distance would, bit for bit: subtrees are pruned only when their
/// lower bound strictly exceeds the best candidate found so far.
class NearestNeighborIndex {
 public:
  explicit NearestNeighborIndex(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }

  /// Minimum squared distance from `query` to the point set. Requires a
  /// non-empty set.
  double nearest_squared(const Vec3& query) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    // Children are -1 for leaves.
    std::int32_t left = -1;
    std::int32_t right = -1;
    Box bounds;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& query, double& best) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
};

struct DistanceReport {
  /// "<X1>-><X2>": maxima are taken over X1, minima over X2.
  std::string direction;
  /// Distance (mm) of each X1 vertex to its nearest X2 vertex, by X1 index.
  std::vector<double> per_vertex;
  double hausdorff = 0.0;
  double mean = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
};

/// Nearest-rank percentile of `values` (need not be sorted). p in (0, 100].
double nearest_rank_percentile(std::span<const double> values, double p);

/// Vertex-to-vertex directed Hausdorff distance max_{x in X1} min_{y in X2} |x - y|
/// with the full per-vertex distribution. Throws EmptyPointSetError when either
/// set is empty.
DistanceReport directed_hausdorff(std::span<const Vec3> from, std::span<const Vec3> to,
                                  std::string direction = "X1->X2", std::size_t workers = 1);
DistanceReport directed_hausdorff(const surface::TriangleMesh& from, const surface::TriangleMesh& to,
                                  std::string direction = "X1->X2", std::size_t workers = 1);

double symmetric_hausdorff(std::span<const Vec3> a, std::span<const Vec3> b);
double symmetric_hausdorff(const surface::TriangleMesh& a, const surface::TriangleMesh& b);

/// Summary fields: direction, hausdorff_mm, mean_mm, p50_mm, p95_mm, p99_mm,
/// vertex_count.
nlohmann::ordered_json summary_json(const DistanceReport& report);

/// Writes `vertex_index,distance_mm` rows to `csv_path` and the summary
/// (direction, hausdorff_mm, mean_mm, p50_mm, p95_mm, p99_mm, vertex_count) to
/// the sibling `.json` file. Returns the JSON path.
std::filesystem::path export_per_vertex_scalars(const DistanceReport& report,
                                                const std::filesystem::path& csv_path);

}  // namespace skinseg::metrics
