#include "skinseg/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "rawvol.hpp"
#include "skinseg/errors.hpp"

namespace skinseg::metrics {

namespace {

constexpr std::uint32_t kLeafSize = 12;

double box_squared_distance(const Box& box, const Vec3& q) {
  double sum = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    double d = 0.0;
    if (q[a] < box.min[a]) {
      d = box.min[a] - q[a];
    } else if (q[a] > box.max[a]) {
      d = q[a] - box.max[a];
    }
    sum += d * d;
  }
  return sum;
}

double& component(Vec3& v, std::size_t axis) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); }

}  // namespace

NearestNeighborIndex::NearestNeighborIndex(std::span<const Vec3> points)
    : points_(points.begin(), points.end()) {
  if (points_.size() > std::numeric_limits<std::int32_t>::max()) {
    throw ConfigError("point set too large for the nearest-neighbour index");
  }
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t NearestNeighborIndex::build(std::uint32_t begin, std::uint32_t end) {
  Node node{begin, end, -1, -1, {points_[begin], points_[begin]}};
  for (std::uint32_t i = begin; i < end; ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      component(node.bounds.min, a) = std::min(node.bounds.min[a], points_[i][a]);
      component(node.bounds.max, a) = std::max(node.bounds.max[a], points_[i][a]);
    }
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  std::size_t axis = 0;
  double widest = -1.0;
  for (std::size_t a = 0; a < 3; ++a) {
    const double extent = node.bounds.max[a] - node.bounds.min[a];
    if (extent > widest) {
      widest = extent;
      axis = a;
    }
  }
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                   [axis](const Vec3& a, const Vec3& b) { return a[axis] < b[axis]; });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void NearestNeighborIndex::search(std::int32_t id, const Vec3& query, double& best) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      best = std::min(best, squared_distance(query, points_[i]));
    }
    return;
  }
  const double dl = box_squared_distance(nodes_[node.left].bounds, query);
  const double dr = box_squared_distance(nodes_[node.right].bounds, query);
  const auto [first, d_first, second, d_second] =
      dl <= dr ? std::tuple{node.left, dl, node.right, dr} : std::tuple{node.right, dr, node.left, dl};
  // The box bound never exceeds the rounded distance of any point inside the
  // box, so pruning on a strict inequality keeps results exact.
  if (!(d_first > best)) search(first, query, best);
  if (!(d_second > best)) search(second, query, best);
}

double NearestNeighborIndex::nearest_squared(const Vec3& query) const {
  if (points_.empty()) throw EmptyPointSetError("empty point set");
  double best = std::numeric_limits<double>::infinity();
  search(0, query, best);
  return best;
}

double nearest_rank_percentile(std::span<const double> values, double p) {
  if (values.empty()) throw EmptyPointSetError("empty point set");
  if (!(p > 0.0 && p <= 100.0)) throw ConfigError("percentile must lie in (0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

DistanceReport directed_hausdorff(std::span<const Vec3> from, std::span<const Vec3> to, std::string direction,
                                  std::size_t workers) {
  if (from.empty() || to.empty()) throw EmptyPointSetError("empty point set");
  const NearestNeighborIndex index(to);

  DistanceReport report;
  report.direction = std::move(direction);
  report.per_vertex.resize(from.size());
  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) report.per_vertex[i] = std::sqrt(index.nearest_squared(from[i]));
  };
  workers = std::clamp<std::size_t>(workers, 1, from.size());
  if (workers == 1) {
    run(0, from.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (from.size() + workers - 1) / workers;
    for (std::size_t begin = 0; begin < from.size(); begin += chunk) {
      pool.emplace_back(run, begin, std::min(from.size(), begin + chunk));
    }
  }

  const auto& d = report.per_vertex;
  report.hausdorff = *std::max_element(d.begin(), d.end());
  const double sum = std::accumulate(d.begin(), d.end(), 0.0);
  // Rounding in the sum can push the quotient one ulp past the maximum.
  report.mean = std::min(sum / static_cast<double>(d.size()), report.hausdorff);
  report.p50 = nearest_rank_percentile(d, 50.0);
  report.p95 = nearest_rank_percentile(d, 95.0);
  report.p99 = nearest_rank_percentile(d, 99.0);
  return report;
}

DistanceReport directed_hausdorff(const surface::TriangleMesh& from, const surface::TriangleMesh& to,
                                  std::string direction, std::size_t workers) {
  return directed_hausdorff(std::span<const Vec3>(from.vertices), std::span<const Vec3>(to.vertices),
                            std::move(direction), workers);
}

double symmetric_hausdorff(std::span<const Vec3> a, std::span<const Vec3> b) {
  return std::max(directed_hausdorff(a, b).hausdorff, directed_hausdorff(b, a).hausdorff);
}

double symmetric_hausdorff(const surface::TriangleMesh& a, const surface::TriangleMesh& b) {
  return symmetric_hausdorff(std::span<const Vec3>(a.vertices), std::span<const Vec3>(b.vertices));
}

nlohmann::ordered_json summary_json(const DistanceReport& report) {
  nlohmann::ordered_json summary;
  summary["direction"] = report.direction;
  summary["hausdorff_mm"] = report.hausdorff;
  summary["mean_mm"] = report.mean;
  summary["p50_mm"] = report.p50;
  summary["p95_mm"] = report.p95;
  summary["p99_mm"] = report.p99;
  summary["vertex_count"] = report.per_vertex.size();
  return summary;
}

std::filesystem::path export_per_vertex_scalars(const DistanceReport& report,
                                                const std::filesystem::path& csv_path) {
  std::string csv = "vertex_index,distance_mm\n";
  char buffer[32];
  for (std::size_t i = 0; i < report.per_vertex.size(); ++i) {
    csv += std::to_string(i);
    csv += ',';
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), report.per_vertex[i]);
    csv.append(buffer, end);
    csv += '\n';
  }
  detail::write_file(csv_path, std::as_bytes(std::span(csv.data(), csv.size())));

  auto json_path = csv_path;
  json_path.replace_extension(".json");
  const std::string text = summary_json(report).dump(2) + "\n";
  detail::write_file(json_path, std::as_bytes(std::span(text.data(), text.size())));
  return json_path;
}

}  // namespace skinseg::metrics
