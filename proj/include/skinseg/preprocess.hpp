#pragma once

#include <cstddef>
#include <optional>

#include "skinseg/volume.hpp"

namespace skinseg::preprocess {

/// Affine rescale of intensities to [0, 1]. Throws DegenerateVolumeError on a
/// constant volume.
Volume normalize_intensities(const Volume& volume);

/// Per-voxel Euclidean norm of the intensity gradient in intensity/mm, before
/// any normalization. Central differences inside, one-sided at faces.
/// Requires every dim >= 2.
Volume gradient_norm(const Volume& volume);

/// gradient_norm rescaled to [0, 1].
Volume gradient_magnitude(const Volume& volume);

/// Grows each axis by 2 * width voxels. The border takes `fill`, defaulting to
/// the volume minimum; the origin shifts so original voxels keep their world
/// positions.
Volume pad_volume(const Volume& volume, std::size_t width, std::optional<float> fill = std::nullopt);

/// Keeps voxels whose indices are multiples of the per-axis factor and scales
/// spacing accordingly. Origin is unchanged.
Volume subsample(const Volume& volume, const AxisFactors& factor);

}  // namespace skinseg::preprocess
