#include "rawvol.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <nlohmann/json.hpp>

#include "skinseg/errors.hpp"
#include "skinseg/volume.hpp"

namespace skinseg::detail {

namespace {

Vec3 read_vec3(const nlohmann::json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw ParseError(std::string("rawvol header: '") + key + "' must be an array of 3 numbers");
  }
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

}  // namespace

std::size_t dtype_size(RawDtype dtype) { return dtype == RawDtype::f32 ? 4 : 1; }

std::string_view dtype_name(RawDtype dtype) { return dtype == RawDtype::f32 ? "f32" : "u8"; }

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<char> chars((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  std::vector<std::byte> bytes(chars.size());
  std::memcpy(bytes.data(), chars.data(), chars.size());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void write_rawvol(const std::filesystem::path& header_path, const RawvolHeader& header,
                  std::span<const std::byte> payload) {
  const auto data_path = rawvol_data_path(header_path);
  if (data_path == header_path) {
    throw ConfigError("rawvol header '" + header_path.string() + "' must not use the .raw extension");
  }
  const auto& g = header.geometry;
  nlohmann::ordered_json j;
  j["dims"] = {g.dims.nx, g.dims.ny, g.dims.nz};
  j["spacing"] = {g.spacing.x, g.spacing.y, g.spacing.z};
  j["origin"] = {g.origin.x, g.origin.y, g.origin.z};
  j["dtype"] = dtype_name(header.dtype);
  const std::string text = j.dump(2) + "\n";
  write_file(header_path, std::as_bytes(std::span(text.data(), text.size())));
  write_file(data_path, payload);
}

RawvolHeader read_rawvol_header(const std::filesystem::path& header_path) {
  const auto bytes = read_file(header_path);
  RawvolHeader header;
  try {
    const auto j = nlohmann::json::parse(reinterpret_cast<const char*>(bytes.data()),
                                         reinterpret_cast<const char*>(bytes.data()) + bytes.size());
    const auto& dims = j.at("dims");
    if (!dims.is_array() || dims.size() != 3) throw ParseError("rawvol header: 'dims' must have 3 entries");
    for (const auto& d : dims) {
      if (!d.is_number_integer() || d.get<long long>() < 1) {
        throw ParseError("rawvol header: dims must be positive integers");
      }
    }
    header.geometry.dims = {dims[0].get<std::size_t>(), dims[1].get<std::size_t>(),
                            dims[2].get<std::size_t>()};
    header.geometry.spacing = read_vec3(j, "spacing");
    header.geometry.origin = j.contains("origin") ? read_vec3(j, "origin") : Vec3{};
    const auto dtype = j.at("dtype").get<std::string>();
    if (dtype == "f32") {
      header.dtype = RawDtype::f32;
    } else if (dtype == "u8") {
      header.dtype = RawDtype::u8;
    } else {
      throw ParseError("rawvol header: unsupported dtype '" + dtype + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("rawvol header '" + header_path.string() + "': " + e.what());
  }
  try {
    header.geometry.validate();
  } catch (const ConfigError& e) {
    throw ParseError("rawvol header '" + header_path.string() + "': " + e.what());
  }
  return header;
}

std::vector<std::byte> read_rawvol_payload(const std::filesystem::path& header_path,
                                           const RawvolHeader& header) {
  const auto data_path = rawvol_data_path(header_path);
  auto payload = read_file(data_path);
  const std::size_t expected = header.geometry.dims.count() * dtype_size(header.dtype);
  if (payload.size() != expected) {
    throw ParseError("rawvol size mismatch: header '" + header_path.string() + "' implies " +
                     std::to_string(expected) + " bytes, '" + data_path.string() + "' holds " +
                     std::to_string(payload.size()));
  }
  return payload;
}

}  // namespace skinseg::detail
