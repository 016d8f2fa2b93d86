#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "skinseg/geometry.hpp"

namespace skinseg::detail {

enum class RawDtype { f32, u8 };

std::size_t dtype_size(RawDtype dtype);
std::string_view dtype_name(RawDtype dtype);

struct RawvolHeader {
  GridGeometry geometry;
  RawDtype dtype = RawDtype::f32;
};

/// Writes the JSON header and the payload bytes (already little-endian).
void write_rawvol(const std::filesystem::path& header_path, const RawvolHeader& header,
                  std::span<const std::byte> payload);

RawvolHeader read_rawvol_header(const std::filesystem::path& header_path);

/// Reads the payload and checks its size against the header.
std::vector<std::byte> read_rawvol_payload(const std::filesystem::path& header_path,
                                           const RawvolHeader& header);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace skinseg::detail
