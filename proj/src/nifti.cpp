#include "nifti.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "endian.hpp"
#include "skinseg/errors.hpp"

namespace skinseg::detail {

namespace {

constexpr std::size_t kHeaderSize = 348;

// Byte offsets of the honored header fields.
constexpr std::size_t kDimOffset = 40;
constexpr std::size_t kDatatypeOffset = 70;
constexpr std::size_t kPixdimOffset = 76;
constexpr std::size_t kVoxOffset = 108;
constexpr std::size_t kSlopeOffset = 112;
constexpr std::size_t kInterOffset = 116;
constexpr std::size_t kMagicOffset = 344;

enum Datatype : std::int16_t {
  kUint8 = 2,
  kInt16 = 4,
  kFloat32 = 16,
  kFloat64 = 64,
  kUint16 = 512,
};

std::vector<std::byte> read_maybe_gzipped(const std::filesystem::path& path) {
  // gzread passes uncompressed files through unchanged.
  std::unique_ptr<gzFile_s, decltype(&gzclose)> file(gzopen(path.string().c_str(), "rb"), &gzclose);
  if (!file) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::byte> bytes;
  std::byte chunk[1 << 16];
  for (;;) {
    const int n = gzread(file.get(), chunk, sizeof(chunk));
    if (n < 0) {
      int errnum = 0;
      const char* message = gzerror(file.get(), &errnum);
      throw IoError("decompression failure on '" + path.string() + "': " + message);
    }
    if (n == 0) break;
    bytes.insert(bytes.end(), chunk, chunk + n);
  }
  return bytes;
}

std::size_t sample_size(std::int16_t datatype) {
  switch (datatype) {
    case kUint8: return 1;
    case kInt16:
    case kUint16: return 2;
    case kFloat32: return 4;
    case kFloat64: return 8;
    default:
      throw ParseError("unsupported NIfTI datatype code " + std::to_string(datatype) +
                       " (supported: 2 uint8, 4 int16, 512 uint16, 16 float32, 64 float64)");
  }
}

double read_sample(const std::byte* p, std::int16_t datatype, std::endian order) {
  switch (datatype) {
    case kUint8: return static_cast<double>(std::to_integer<std::uint8_t>(*p));
    case kInt16: return load_bytes<std::int16_t>(p, order);
    case kUint16: return load_bytes<std::uint16_t>(p, order);
    case kFloat32: return load_bytes<float>(p, order);
    default: return load_bytes<double>(p, order);
  }
}

}  // namespace

Volume load_nifti(const std::filesystem::path& path) {
  const auto bytes = read_maybe_gzipped(path);
  const auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("NIfTI '" + path.string() + "': " + why);
  };
  if (bytes.size() < kHeaderSize) throw fail("file shorter than the 348-byte header");

  std::endian order = std::endian::little;
  if (load_bytes<std::int32_t>(bytes.data(), std::endian::little) != 348) {
    if (load_bytes<std::int32_t>(bytes.data(), std::endian::big) != 348) {
      throw fail("sizeof_hdr is not 348");
    }
    order = std::endian::big;
  }

  const char* magic = reinterpret_cast<const char*>(&bytes[kMagicOffset]);
  if (std::string(magic, 3) == "ni1") throw fail("two-file (.hdr/.img) NIfTI is not supported");
  if (std::string(magic, 3) != "n+1") throw fail("bad magic (expected 'n+1')");

  std::int16_t dim[8];
  float pixdim[8];
  for (int i = 0; i < 8; ++i) {
    dim[i] = load_bytes<std::int16_t>(&bytes[kDimOffset + 2 * i], order);
    pixdim[i] = load_bytes<float>(&bytes[kPixdimOffset + 4 * i], order);
  }
  if (dim[0] < 1 || dim[0] > 7) throw fail("dim[0] = " + std::to_string(dim[0]) + " out of range");
  for (int i = 4; i <= dim[0]; ++i) {
    if (dim[i] > 1) throw fail("only 3D volumes are supported (dim[" + std::to_string(i) + "] > 1)");
  }

  GridGeometry geometry;
  std::size_t extent[3] = {1, 1, 1};
  double spacing[3] = {1.0, 1.0, 1.0};
  for (int a = 0; a < 3; ++a) {
    if (a + 1 > dim[0]) continue;
    if (dim[a + 1] < 1) throw fail("dim[" + std::to_string(a + 1) + "] must be >= 1");
    extent[a] = static_cast<std::size_t>(dim[a + 1]);
    const double s = pixdim[a + 1];
    if (!(s > 0.0) || !std::isfinite(s)) throw fail("pixdim[" + std::to_string(a + 1) + "] must be > 0");
    spacing[a] = s;
  }
  geometry.dims = {extent[0], extent[1], extent[2]};
  geometry.spacing = {spacing[0], spacing[1], spacing[2]};

  const auto datatype = load_bytes<std::int16_t>(&bytes[kDatatypeOffset], order);
  const std::size_t width = sample_size(datatype);

  const float vox_offset = load_bytes<float>(&bytes[kVoxOffset], order);
  if (!(vox_offset >= static_cast<float>(kHeaderSize)) || !std::isfinite(vox_offset)) {
    throw fail("vox_offset must be >= 348");
  }
  const auto offset = static_cast<std::size_t>(vox_offset);
  const std::size_t count = geometry.dims.count();
  if (bytes.size() < offset || bytes.size() - offset < count * width) {
    throw fail("data size mismatch: header implies " + std::to_string(count * width) +
               " bytes at offset " + std::to_string(offset) + ", file holds " +
               std::to_string(bytes.size() > offset ? bytes.size() - offset : 0));
  }

  const double slope = load_bytes<float>(&bytes[kSlopeOffset], order);
  const double inter = load_bytes<float>(&bytes[kInterOffset], order);
  const bool scaled = slope != 0.0 && std::isfinite(slope) && std::isfinite(inter);

  std::vector<float> data(count);
  std::size_t non_finite = 0;
  for (std::size_t i = 0; i < count; ++i) {
    double v = read_sample(&bytes[offset + i * width], datatype, order);
    if (scaled) v = slope * v + inter;
    data[i] = static_cast<float>(v);
    if (!std::isfinite(data[i])) ++non_finite;
  }
  if (non_finite != 0) throw fail(std::to_string(non_finite) + " non-finite values");
  return Volume(geometry, std::move(data));
}

}  // namespace skinseg::detail
