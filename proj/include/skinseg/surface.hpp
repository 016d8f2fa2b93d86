#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "skinseg/geometry.hpp"
#include "skinseg/segmentation.hpp"

namespace skinseg::surface {

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle surface in millimeter world coordinates. Triangles wind
/// counter-clockwise seen from outside the body.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  bool empty() const { return vertices.empty(); }
  friend bool operator==(const TriangleMesh&, const TriangleMesh&) = default;
};

/// Throws ConfigError on out-of-range or repeated indices and non-finite
/// vertices.
void validate(const TriangleMesh& mesh);

/// Marching Cubes at isolevel 0.5 over the binarized label field
/// (BOUNDARY/INTERIOR = 1, BACKGROUND = 0). Vertices sit at voxel-edge
/// midpoints and are shared between neighbouring cells. Requires every dim >= 2.
TriangleMesh extract_surface(const segmentation::LabelGrid& grid);

/// True iff every undirected edge is used by exactly two triangles.
bool is_watertight(const TriangleMesh& mesh);

/// Signed enclosed volume (mm^3); positive for outward-facing triangles.
double signed_volume(const TriangleMesh& mesh);

/// Bounding box of the vertices, nullopt for an empty mesh.
std::optional<Box> bounding_box(const TriangleMesh& mesh);

/// Keeps the vertices inside `box` and the triangles whose three corners all
/// survive, with vertices renumbered in their original order.
TriangleMesh crop_to_box(const TriangleMesh& mesh, const Box& box);

enum class MeshFormat { obj, ply };

std::optional<MeshFormat> parse_mesh_format(std::string_view name);
/// From the extension (.obj / .ply); throws ConfigError otherwise.
MeshFormat mesh_format_from_path(const std::filesystem::path& path);

/// OBJ: ASCII `v x y z` / `f i j k` with 1-based indices.
/// PLY: binary little-endian, float32 vertices and uchar/int32 face lists.
void export_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format);
TriangleMesh import_mesh(const std::filesystem::path& path, MeshFormat format);

}  // namespace skinseg::surface
