#pragma once

#include <filesystem>

#include "skinseg/volume.hpp"

namespace skinseg::detail {

/// Minimal single-file NIfTI-1 reader (`n+1` magic, plain or gzip).
/// Orientation (qform/sform) is ignored; the origin is always (0, 0, 0).
Volume load_nifti(const std::filesystem::path& path);

}  // namespace skinseg::detail
