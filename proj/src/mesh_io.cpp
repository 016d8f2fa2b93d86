#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "endian.hpp"
#include "rawvol.hpp"
#include "skinseg/errors.hpp"
#include "skinseg/surface.hpp"

namespace skinseg::surface {

std::optional<MeshFormat> parse_mesh_format(std::string_view name) {
  if (name == "obj") return MeshFormat::obj;
  if (name == "ply") return MeshFormat::ply;
  return std::nullopt;
}

MeshFormat mesh_format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".obj") return MeshFormat::obj;
  if (ext == ".ply") return MeshFormat::ply;
  throw ConfigError("cannot infer mesh format from '" + path.string() + "' (expected .obj or .ply)");
}

namespace {

void append_number(std::string& out, double v) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  out.append(buffer, end);
}

void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::string text;
  text.reserve(mesh.vertices.size() * 40 + mesh.triangles.size() * 24);
  for (const auto& v : mesh.vertices) {
    text += "v ";
    append_number(text, v.x);
    text += ' ';
    append_number(text, v.y);
    text += ' ';
    append_number(text, v.z);
    text += '\n';
  }
  for (const auto& t : mesh.triangles) {
    text += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' + std::to_string(t[2] + 1) + '\n';
  }
  detail::write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

void write_ply(const TriangleMesh& mesh, const std::filesystem::path& path) {
  const std::string header = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                             std::to_string(mesh.vertices.size()) +
                             "\nproperty float x\nproperty float y\nproperty float z\nelement face " +
                             std::to_string(mesh.triangles.size()) +
                             "\nproperty list uchar int vertex_indices\nend_header\n";
  std::vector<std::byte> bytes(header.size() + mesh.vertices.size() * 12 + mesh.triangles.size() * 13);
  std::memcpy(bytes.data(), header.data(), header.size());
  std::byte* p = bytes.data() + header.size();
  for (const auto& v : mesh.vertices) {
    detail::store_le(p, static_cast<float>(v.x));
    detail::store_le(p + 4, static_cast<float>(v.y));
    detail::store_le(p + 8, static_cast<float>(v.z));
    p += 12;
  }
  for (const auto& t : mesh.triangles) {
    *p++ = std::byte{3};
    for (int k = 0; k < 3; ++k, p += 4) detail::store_le(p, static_cast<std::int32_t>(t[k]));
  }
  detail::write_file(path, bytes);
}

// ---------------------------------------------------------------------------
// OBJ

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

template <class T>
bool parse_token(std::string_view token, T& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && end == token.data() + token.size();
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  TriangleMesh mesh;
  std::vector<std::size_t> face_lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  const auto fail = [&](const std::string& why) {
    return ParseError("OBJ '" + path.string() + "' line " + std::to_string(line_no) + ": " + why);
  };
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "v") {
      if (tokens.size() < 4) throw fail("vertex needs 3 coordinates");
      Vec3 v;
      if (!parse_token(tokens[1], v.x) || !parse_token(tokens[2], v.y) || !parse_token(tokens[3], v.z)) {
        throw fail("bad vertex coordinate");
      }
      if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) throw fail("non-finite vertex");
      mesh.vertices.push_back(v);
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) throw fail("face needs at least 3 vertices");
      std::vector<std::uint32_t> corners;
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        // Only the position index before any '/' matters.
        const auto token = tokens[k].substr(0, tokens[k].find('/'));
        long long index = 0;
        if (!parse_token(token, index)) throw fail("bad face index '" + std::string(tokens[k]) + "'");
        if (index == 0) throw fail("face index 0 (indices are 1-based)");
        const long long resolved = index > 0 ? index - 1 : static_cast<long long>(mesh.vertices.size()) + index;
        if (resolved < 0 || resolved >= static_cast<long long>(mesh.vertices.size())) {
          throw fail("face index " + std::to_string(index) + " out of range");
        }
        corners.push_back(static_cast<std::uint32_t>(resolved));
      }
      for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
        const Triangle t{corners[0], corners[k], corners[k + 1]};
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw fail("degenerate face");
        mesh.triangles.push_back(t);
      }
    }
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// PLY

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<PlyType> parse_ply_type(std::string_view name) {
  if (name == "char" || name == "int8") return PlyType::i8;
  if (name == "uchar" || name == "uint8") return PlyType::u8;
  if (name == "short" || name == "int16") return PlyType::i16;
  if (name == "ushort" || name == "uint16") return PlyType::u16;
  if (name == "int" || name == "int32") return PlyType::i32;
  if (name == "uint" || name == "uint32") return PlyType::u32;
  if (name == "float" || name == "float32") return PlyType::f32;
  if (name == "double" || name == "float64") return PlyType::f64;
  return std::nullopt;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

/// Sequential value reader over the PLY body, binary or ASCII.
class PlyBody {
 public:
  PlyBody(std::span<const std::byte> body, bool ascii, std::endian order, const std::filesystem::path& path,
          std::size_t body_offset)
      : body_(body), ascii_(ascii), order_(order), path_(path), body_offset_(body_offset) {}

  double read(PlyType type) {
    if (ascii_) return read_ascii();
    const std::size_t n = ply_size(type);
    if (pos_ + n > body_.size()) throw fail("unexpected end of data");
    const std::byte* p = body_.data() + pos_;
    pos_ += n;
    switch (type) {
      case PlyType::i8: return static_cast<std::int8_t>(std::to_integer<std::uint8_t>(*p));
      case PlyType::u8: return std::to_integer<std::uint8_t>(*p);
      case PlyType::i16: return detail::load_bytes<std::int16_t>(p, order_);
      case PlyType::u16: return detail::load_bytes<std::uint16_t>(p, order_);
      case PlyType::i32: return detail::load_bytes<std::int32_t>(p, order_);
      case PlyType::u32: return detail::load_bytes<std::uint32_t>(p, order_);
      case PlyType::f32: return detail::load_bytes<float>(p, order_);
      case PlyType::f64: return detail::load_bytes<double>(p, order_);
    }
    return 0.0;
  }

  ParseError fail(const std::string& why) const {
    return ParseError("PLY '" + path_.string() + "' at byte " + std::to_string(body_offset_ + pos_) + ": " + why);
  }

 private:
  double read_ascii() {
    const auto* chars = reinterpret_cast<const char*>(body_.data());
    while (pos_ < body_.size() && std::isspace(static_cast<unsigned char>(chars[pos_]))) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < body_.size() && !std::isspace(static_cast<unsigned char>(chars[pos_]))) ++pos_;
    double value = 0.0;
    if (start == pos_ || !parse_token(std::string_view(chars + start, pos_ - start), value)) {
      throw fail("bad or missing ASCII value");
    }
    return value;
  }

  std::span<const std::byte> body_;
  bool ascii_;
  std::endian order_;
  const std::filesystem::path& path_;
  std::size_t body_offset_;
  std::size_t pos_ = 0;
};

TriangleMesh read_ply(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const auto header_fail = [&](std::size_t line, const std::string& why) {
    return ParseError("PLY '" + path.string() + "' header line " + std::to_string(line) + ": " + why);
  };

  constexpr std::string_view kEnd = "end_header";
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool ascii = false;
  std::endian order = std::endian::little;
  std::vector<PlyElement> elements;
  bool ended = false;
  while (pos < text.size() && !ended) {
    const std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) break;
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;
    const auto tokens = split_ws(line);
    if (line_no == 1) {
      if (tokens.size() != 1 || tokens[0] != "ply") throw header_fail(line_no, "missing 'ply' magic");
      continue;
    }
    if (tokens.empty() || tokens[0] == "comment" || tokens[0] == "obj_info") continue;
    if (tokens[0] == "format") {
      if (tokens.size() != 3) throw header_fail(line_no, "bad format line");
      if (tokens[1] == "ascii") {
        ascii = true;
      } else if (tokens[1] == "binary_little_endian") {
        order = std::endian::little;
      } else if (tokens[1] == "binary_big_endian") {
        order = std::endian::big;
      } else {
        throw header_fail(line_no, "unknown format '" + std::string(tokens[1]) + "'");
      }
    } else if (tokens[0] == "element") {
      std::size_t count = 0;
      if (tokens.size() != 3 || !parse_token(tokens[2], count)) throw header_fail(line_no, "bad element line");
      elements.push_back({std::string(tokens[1]), count, {}});
    } else if (tokens[0] == "property") {
      if (elements.empty()) throw header_fail(line_no, "property before any element");
      PlyProperty prop;
      if (tokens.size() == 5 && tokens[1] == "list") {
        const auto count_type = parse_ply_type(tokens[2]);
        const auto item_type = parse_ply_type(tokens[3]);
        if (!count_type || !item_type) throw header_fail(line_no, "unknown list type");
        prop = {std::string(tokens[4]), *item_type, true, *count_type};
      } else if (tokens.size() == 3) {
        const auto type = parse_ply_type(tokens[1]);
        if (!type) throw header_fail(line_no, "unknown type '" + std::string(tokens[1]) + "'");
        prop = {std::string(tokens[2]), *type, false, PlyType::u8};
      } else {
        throw header_fail(line_no, "bad property line");
      }
      elements.back().properties.push_back(prop);
    } else if (tokens[0] == kEnd) {
      ended = true;
    } else {
      throw header_fail(line_no, "unexpected keyword '" + std::string(tokens[0]) + "'");
    }
  }
  if (!ended) throw header_fail(line_no, "missing end_header");

  PlyBody body{std::span(bytes).subspan(pos), ascii, order, path, pos};
  TriangleMesh mesh;
  bool have_vertices = false;
  for (const auto& element : elements) {
    const bool is_vertex = element.name == "vertex";
    const bool is_face = element.name == "face";
    if (is_vertex) {
      have_vertices = true;
      mesh.vertices.reserve(element.count);
    }
    for (std::size_t i = 0; i < element.count; ++i) {
      Vec3 v;
      std::vector<std::uint32_t> corners;
      for (const auto& prop : element.properties) {
        if (prop.is_list) {
          const double count = body.read(prop.count_type);
          if (count < 0 || count != std::floor(count)) throw body.fail("bad list count");
          const bool indices = is_face && (prop.name == "vertex_indices" || prop.name == "vertex_index");
          for (std::size_t k = 0; k < static_cast<std::size_t>(count); ++k) {
            const double value = body.read(prop.type);
            if (indices) {
              if (value < 0 || value != std::floor(value) || !have_vertices || value >= static_cast<double>(mesh.vertices.size())) {
                throw body.fail("face " + std::to_string(i) + " index out of range");
              }
              corners.push_back(static_cast<std::uint32_t>(value));
            }
          }
        } else {
          const double value = body.read(prop.type);
          if (is_vertex) {
            if (prop.name == "x") v.x = value;
            if (prop.name == "y") v.y = value;
            if (prop.name == "z") v.z = value;
          }
        }
      }
      if (is_vertex) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
          throw body.fail("non-finite vertex " + std::to_string(i));
        }
        mesh.vertices.push_back(v);
      }
      if (is_face) {
        if (corners.size() < 3) throw body.fail("face " + std::to_string(i) + " has fewer than 3 vertices");
        for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
          const Triangle t{corners[0], corners[k], corners[k + 1]};
          if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw body.fail("degenerate face " + std::to_string(i));
          mesh.triangles.push_back(t);
        }
      }
    }
  }
  return mesh;
}

}  // namespace

void export_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format) {
  validate(mesh);
  if (format == MeshFormat::obj) {
    write_obj(mesh, path);
  } else {
    write_ply(mesh, path);
  }
}

TriangleMesh import_mesh(const std::filesystem::path& path, MeshFormat format) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: '" + path.string() + "'");
  return format == MeshFormat::obj ? read_obj(path) : read_ply(path);
}

}  // namespace skinseg::surface
