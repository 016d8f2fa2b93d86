#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>

#include "mc_tables.hpp"
#include "skinseg/errors.hpp"
#include "skinseg/surface.hpp"

namespace skinseg::surface {

using segmentation::Label;
using segmentation::LabelGrid;

namespace {

constexpr double kIsolevel = 0.5;

}  // namespace

void validate(const TriangleMesh& mesh) {
  const auto n = mesh.vertices.size();
  for (const auto& v : mesh.vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
      throw ConfigError("mesh has a non-finite vertex");
    }
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    if (tri[0] >= n || tri[1] >= n || tri[2] >= n) {
      throw ConfigError("triangle " + std::to_string(t) + " references a missing vertex");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw ConfigError("triangle " + std::to_string(t) + " is degenerate");
    }
  }
}

TriangleMesh extract_surface(const LabelGrid& grid) {
  const auto& g = grid.geometry();
  const auto& d = g.dims;
  if (d.nx < 2 || d.ny < 2 || d.nz < 2) {
    throw ConfigError("surface extraction needs at least 2 voxels along every axis");
  }
  const auto labels = grid.labels();
  const auto field = [&](std::size_t i) { return labels[i] == Label::background ? 0.0 : 1.0; };

  TriangleMesh mesh;
  // Key: (index of the lower voxel of the edge) * 3 + axis.
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;

  const auto vertex_on_edge = [&](std::size_t x, std::size_t y, std::size_t z, int edge) {
    const auto& ca = detail::kCornerOffsets[detail::kEdgeCorners[edge][0]];
    const auto& cb = detail::kCornerOffsets[detail::kEdgeCorners[edge][1]];
    const auto& lower = ca[0] + ca[1] + ca[2] <= cb[0] + cb[1] + cb[2] ? ca : cb;
    const auto& upper = &lower == &ca ? cb : ca;
    const int axis = ca[0] != cb[0] ? 0 : (ca[1] != cb[1] ? 1 : 2);
    const std::size_t lx = x + lower[0], ly = y + lower[1], lz = z + lower[2];
    const std::size_t lo = g.index(lx, ly, lz);
    const std::uint64_t key = static_cast<std::uint64_t>(lo) * 3 + static_cast<std::uint64_t>(axis);

    const auto [it, inserted] = edge_vertex.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (inserted) {
      const double v0 = field(lo);
      const double v1 = field(g.index(x + upper[0], y + upper[1], z + upper[2]));
      const double t = (kIsolevel - v0) / (v1 - v0);
      double p[3] = {static_cast<double>(lx), static_cast<double>(ly), static_cast<double>(lz)};
      p[axis] += t;
      mesh.vertices.push_back(g.world(p[0], p[1], p[2]));
    }
    return it->second;
  };

  for (std::size_t z = 0; z + 1 < d.nz; ++z) {
    for (std::size_t y = 0; y + 1 < d.ny; ++y) {
      for (std::size_t x = 0; x + 1 < d.nx; ++x) {
        unsigned cube = 0;
        for (int c = 0; c < 8; ++c) {
          const auto& o = detail::kCornerOffsets[c];
          if (field(g.index(x + o[0], y + o[1], z + o[2])) < kIsolevel) cube |= 1u << c;
        }
        if (cube == 0 || cube == 255) continue;
        const auto& row = detail::kTriangleTable[cube];
        for (int k = 0; row[k] != -1; k += 3) {
          const std::uint32_t a = vertex_on_edge(x, y, z, row[k]);
          const std::uint32_t b = vertex_on_edge(x, y, z, row[k + 1]);
          const std::uint32_t c = vertex_on_edge(x, y, z, row[k + 2]);
          // With below-isolevel corners flagged, table winding faces outward.
          mesh.triangles.push_back({a, b, c});
        }
      }
    }
  }
  return mesh;
}

bool is_watertight(const TriangleMesh& mesh) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const auto a = t[k];
      const auto b = t[(k + 1) % 3];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 0; i < edges.size();) {
    std::size_t j = i;
    while (j < edges.size() && edges[j] == edges[i]) ++j;
    if (j - i != 2) return false;
    i = j;
  }
  return true;
}

double signed_volume(const TriangleMesh& mesh) {
  double sum = 0.0;
  for (const auto& t : mesh.triangles) {
    sum += dot(mesh.vertices[t[0]], cross(mesh.vertices[t[1]], mesh.vertices[t[2]]));
  }
  return sum / 6.0;
}

std::optional<Box> bounding_box(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) return std::nullopt;
  Box box{mesh.vertices.front(), mesh.vertices.front()};
  for (const auto& v : mesh.vertices) {
    box.min = {std::min(box.min.x, v.x), std::min(box.min.y, v.y), std::min(box.min.z, v.z)};
    box.max = {std::max(box.max.x, v.x), std::max(box.max.y, v.y), std::max(box.max.z, v.z)};
  }
  return box;
}

TriangleMesh crop_to_box(const TriangleMesh& mesh, const Box& box) {
  constexpr auto kDropped = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> remap(mesh.vertices.size(), kDropped);
  TriangleMesh out;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (box.contains(mesh.vertices[i])) {
      remap[i] = static_cast<std::uint32_t>(out.vertices.size());
      out.vertices.push_back(mesh.vertices[i]);
    }
  }
  for (const auto& t : mesh.triangles) {
    const Triangle r{remap[t[0]], remap[t[1]], remap[t[2]]};
    if (r[0] != kDropped && r[1] != kDropped && r[2] != kDropped) out.triangles.push_back(r);
  }
  return out;
}

}  // namespace skinseg::surface
