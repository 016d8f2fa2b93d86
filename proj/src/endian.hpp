#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstring>

namespace skinseg::detail {

/// Reads a trivially copyable value stored with the given byte order.
template <class T>
T load_bytes(const std::byte* p, std::endian order = std::endian::little) {
  std::byte buffer[sizeof(T)];
  std::memcpy(buffer, p, sizeof(T));
  if (order != std::endian::native) std::reverse(buffer, buffer + sizeof(T));
  T value;
  std::memcpy(&value, buffer, sizeof(T));
  return value;
}

/// Writes a value little-endian.
template <class T>
void store_le(std::byte* p, T value) {
  std::memcpy(p, &value, sizeof(T));
  if constexpr (std::endian::native != std::endian::little) std::reverse(p, p + sizeof(T));
}

}  // namespace skinseg::detail
