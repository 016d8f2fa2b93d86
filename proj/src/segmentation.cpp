#include "skinseg/segmentation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>

#include <spdlog/spdlog.h>

#include "rawvol.hpp"
#include "skinseg/errors.hpp"
#include "skinseg/preprocess.hpp"

namespace skinseg::segmentation {

LabelGrid::LabelGrid(GridGeometry geometry, Label fill)
    : LabelGrid(geometry, std::vector<Label>(geometry.dims.count(), fill)) {}

LabelGrid::LabelGrid(GridGeometry geometry, std::vector<Label> labels)
    : geometry_(geometry), labels_(std::move(labels)) {
  geometry_.validate();
  if (labels_.size() != geometry_.dims.count()) {
    throw ConfigError("label grid holds " + std::to_string(labels_.size()) + " labels, dims imply " +
                      std::to_string(geometry_.dims.count()));
  }
}

std::span<const Label> LabelGrid::slice(std::size_t z) const {
  const std::size_t plane = geometry_.dims.nx * geometry_.dims.ny;
  return std::span<const Label>(labels_).subspan(z * plane, plane);
}

std::span<Label> LabelGrid::slice(std::size_t z) {
  const std::size_t plane = geometry_.dims.nx * geometry_.dims.ny;
  return std::span<Label>(labels_).subspan(z * plane, plane);
}

std::size_t LabelGrid::count(Label label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

std::string_view to_string(IsovalueStrategy::Kind kind) {
  return kind == IsovalueStrategy::Kind::fixed ? "fixed" : "gradient";
}

void SegmentationConfig::validate() const {
  if (!(isovalue.value > 0.0 && isovalue.value < 1.0)) {
    throw ConfigError("isovalue must lie in (0, 1), got " + std::to_string(isovalue.value));
  }
  if (connectivity != Connectivity::four && connectivity != Connectivity::eight) {
    throw ConfigError("connectivity must be 4 or 8");
  }
  for (std::size_t f : subsample_factor) {
    if (f < 1) throw ConfigError("subsample factor must be >= 1");
  }
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

ResolvedVolume resolve_isovalue(const Volume& volume, const IsovalueStrategy& strategy) {
  if (!(strategy.value > 0.0 && strategy.value < 1.0)) {
    throw ConfigError("isovalue must lie in (0, 1), got " + std::to_string(strategy.value));
  }
  const bool gradient = strategy.kind == IsovalueStrategy::Kind::gradient;
  // Normalize first so a constant input reports a degenerate range either way.
  Volume normalized = preprocess::normalize_intensities(volume);
  if (gradient) normalized = preprocess::gradient_magnitude(normalized);
  return {std::move(normalized), IsovalueReport{strategy.kind, strategy.value, gradient}};
}

PixelCoord select_seed(const SliceView& slice, double isovalue) {
  if (slice.size() == 0) throw ConfigError("empty slice");
  const PixelCoord corners[4] = {
      {0, 0}, {slice.nx - 1, 0}, {0, slice.ny - 1}, {slice.nx - 1, slice.ny - 1}};
  for (const auto& c : corners) {
    if (slice.at(c.x, c.y) < isovalue) return c;
  }
  throw NoSeedError("no background seed: every slice corner is >= isovalue " + std::to_string(isovalue));
}

namespace {

/// Flood fill with reusable scratch buffers. The frontier is a FIFO stored in
/// a flat array: every pixel is enqueued at most once.
class SliceFiller {
 public:
  void fill(const SliceView& slice, double isovalue, PixelCoord seed, Connectivity connectivity,
            std::span<Label> out, FillStats* stats) {
    const std::size_t nx = slice.nx;
    const std::size_t ny = slice.ny;
    const std::size_t n = slice.size();
    if (seed.x >= nx || seed.y >= ny) throw ConfigError("seed outside the slice");

    std::fill(out.begin(), out.end(), Label::interior);
    visited_.assign(n, 0);
    frontier_.resize(n);
    std::size_t head = 0;
    std::size_t tail = 0;
    std::size_t evaluations = 1;

    const auto seed_index = static_cast<std::uint32_t>(seed.x + nx * seed.y);
    if (!(slice.values[seed_index] < isovalue)) {
      throw ConfigError("seed (" + std::to_string(seed.x) + ", " + std::to_string(seed.y) +
                        ") is not below the isovalue");
    }
    out[seed_index] = Label::background;
    visited_[seed_index] = 1;

    const bool diagonal = connectivity == Connectivity::eight;
    const auto push_neighbours = [&](std::uint32_t p) {
      const std::size_t x = p % nx;
      const std::size_t y = p / nx;
      const bool left = x > 0, right = x + 1 < nx, down = y > 0, up = y + 1 < ny;
      const auto visit = [&](std::size_t q) {
        if (!visited_[q]) {
          visited_[q] = 1;
          frontier_[tail++] = static_cast<std::uint32_t>(q);
        }
      };
      if (left) visit(p - 1);
      if (right) visit(p + 1);
      if (down) visit(p - nx);
      if (up) visit(p + nx);
      if (diagonal) {
        if (left && down) visit(p - nx - 1);
        if (right && down) visit(p - nx + 1);
        if (left && up) visit(p + nx - 1);
        if (right && up) visit(p + nx + 1);
      }
    };

    push_neighbours(seed_index);
    while (head < tail) {
      const std::uint32_t p = frontier_[head++];
      ++evaluations;
      if (slice.values[p] < isovalue) {
        out[p] = Label::background;
        push_neighbours(p);
      } else {
        out[p] = Label::boundary;
      }
    }
    if (stats != nullptr) stats->evaluations = evaluations;
  }

 private:
  std::vector<std::uint32_t> frontier_;
  std::vector<std::uint8_t> visited_;
};

}  // namespace

LabelSlice segment_slice(const SliceView& slice, double isovalue, PixelCoord seed,
                         Connectivity connectivity, FillStats* stats) {
  LabelSlice result{slice.nx, slice.ny, std::vector<Label>(slice.size())};
  SliceFiller().fill(slice, isovalue, seed, connectivity, result.labels, stats);
  return result;
}

SegmentationResult segment_volume(const Volume& volume, const SegmentationConfig& config) {
  config.validate();
  const auto& factor = config.subsample_factor;
  if (config.seed.explicit_seed && !volume.geometry().contains(*config.seed.explicit_seed)) {
    throw ConfigError("explicit seed lies outside the volume");
  }

  const Volume coarse = preprocess::subsample(volume, factor);
  ResolvedVolume resolved = resolve_isovalue(coarse, config.isovalue);
  const Volume padded = preprocess::pad_volume(resolved.volume, config.pad_width);
  const double isovalue = resolved.report.isovalue;

  std::optional<PixelCoord> fixed_seed;
  if (const auto& s = config.seed.explicit_seed) {
    fixed_seed = PixelCoord{s->x / factor[0] + config.pad_width, s->y / factor[1] + config.pad_width};
  }

  LabelGrid grid(padded.geometry(), Label::interior);
  const std::size_t nz = padded.dims().nz;
  std::vector<std::uint8_t> seedless(nz, 0);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto worker = [&] {
    SliceFiller filler;
    for (std::size_t z = next++; z < nz && !failed; z = next++) {
      try {
        const SliceView view = slice_at(padded, z);
        PixelCoord seed;
        if (fixed_seed) {
          seed = *fixed_seed;
          if (!(view.at(seed.x, seed.y) < isovalue)) {
            seedless[z] = 1;
            continue;
          }
        } else {
          try {
            seed = select_seed(view, isovalue);
          } catch (const NoSeedError&) {
            seedless[z] = 1;
            continue;
          }
        }
        filler.fill(view, isovalue, seed, config.connectivity, grid.slice(z), nullptr);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::min(config.workers, std::max<std::size_t>(nz, 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SegmentationResult result{std::move(grid), resolved.report, {}};
  for (std::size_t z = 0; z < nz; ++z) {
    if (seedless[z]) result.seedless_slices.push_back(z);
  }
  if (!result.seedless_slices.empty()) {
    spdlog::warn("{} slice(s) had no background seed and were labeled INTERIOR (first: z={})",
                 result.seedless_slices.size(), result.seedless_slices.front());
  }
  return result;
}

void save_label_grid(const LabelGrid& grid, const std::filesystem::path& header) {
  const auto labels = grid.labels();
  std::vector<std::byte> payload(labels.size());
  std::transform(labels.begin(), labels.end(), payload.begin(),
                 [](Label l) { return static_cast<std::byte>(l); });
  detail::write_rawvol(header, {grid.geometry(), detail::RawDtype::u8}, payload);
}

LabelGrid load_label_grid(const std::filesystem::path& header_path) {
  const auto header = detail::read_rawvol_header(header_path);
  if (header.dtype != detail::RawDtype::u8) {
    throw ParseError("label grid '" + header_path.string() + "' must have dtype u8");
  }
  const auto payload = detail::read_rawvol_payload(header_path, header);
  std::vector<Label> labels(payload.size());
  for (std::size_t i = 0; i < payload.size(); ++i) {
    const auto v = std::to_integer<std::uint8_t>(payload[i]);
    if (v > 2) throw ParseError("label grid '" + header_path.string() + "': invalid label " + std::to_string(v));
    labels[i] = static_cast<Label>(v);
  }
  return LabelGrid(header.geometry, std::move(labels));
}

}  // namespace skinseg::segmentation
