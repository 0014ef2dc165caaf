#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dentobox/errors.hpp"

namespace dentobox {

// Highest tooth label; 0 is background.
inline constexpr int kMaxLabel = 32;

struct PointI {
  int x = 0;
  int y = 0;
  friend bool operator==(const PointI&, const PointI&) = default;
  friend auto operator<=>(const PointI&, const PointI&) = default;
};

// Row-major grid of tooth labels (0 = background, 1..32 = teeth).
class LabelMap {
 public:
  LabelMap() = default;

  LabelMap(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height) {
    check_dims(width, height);
    labels_.assign(static_cast<std::size_t>(width) * height, fill);
    check_value(fill, 0, 0);
  }

  LabelMap(int width, int height, std::vector<std::uint8_t> labels)
      : width_(width), height_(height), labels_(std::move(labels)) {
    check_dims(width, height);
    if (labels_.size() != static_cast<std::size_t>(width) * height)
      throw invariant_error("LabelMap: grid length != width * height");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      check_value(labels_[i], static_cast<int>(i) % width,
                  static_cast<int>(i) / width);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return labels_.size(); }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  std::uint8_t at(int x, int y) const {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t& at(int x, int y) {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const std::uint8_t> values() const { return labels_; }
  std::span<std::uint8_t> values() { return labels_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  static void check_dims(int width, int height) {
    if (width <= 0 || height <= 0)
      throw invariant_error("LabelMap: width and height must be positive");
  }
  static void check_value(std::uint8_t v, int x, int y) {
    if (v > kMaxLabel)
      throw invariant_error("LabelMap: value " + std::to_string(v) + " at (" +
                            std::to_string(x) + ", " + std::to_string(y) +
                            ") exceeds " + std::to_string(kMaxLabel));
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> labels_;
};

// One 8-connected component of a single label.
struct Instance {
  int label = 0;
  std::vector<PointI> pixels;  // sorted by (y, x)

  int area() const { return static_cast<int>(pixels.size()); }

  // Arithmetic mean of the pixel coordinates.
  std::pair<double, double> centroid() const {
    double sx = 0.0, sy = 0.0;
    for (const PointI& p : pixels) {
      sx += p.x;
      sy += p.y;
    }
    const double n = static_cast<double>(pixels.size());
    return {sx / n, sy / n};
  }

  bool contains(PointI p) const {
    auto it = std::lower_bound(pixels.begin(), pixels.end(), p,
                               [](PointI a, PointI b) {
                                 return std::pair(a.y, a.x) < std::pair(b.y, b.x);
                               });
    return it != pixels.end() && *it == p;
  }
};

// 8-neighborhood offsets.
inline constexpr std::array<int, 8> kNeighborDx{1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr std::array<int, 8> kNeighborDy{0, -1, -1, -1, 0, 1, 1, 1};

// One Instance per 8-connected component of each nonzero label, ordered by
// ascending label, then by the component's first pixel in row-major scan.
inline std::vector<Instance> extract_instances(const LabelMap& map) {
  const int w = map.width();
  const int h = map.height();
  std::vector<char> visited(map.size(), 0);
  std::vector<Instance> out;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      const std::uint8_t label = map.at(x, y);
      if (label == 0 || visited[idx]) continue;

      Instance inst;
      inst.label = label;
      std::queue<PointI> frontier;
      frontier.push({x, y});
      visited[idx] = 1;
      while (!frontier.empty()) {
        const PointI p = frontier.front();
        frontier.pop();
        inst.pixels.push_back(p);
        for (int k = 0; k < 8; ++k) {
          const int nx = p.x + kNeighborDx[k];
          const int ny = p.y + kNeighborDy[k];
          if (!map.in_bounds(nx, ny)) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
          if (visited[nidx] || map.at(nx, ny) != label) continue;
          visited[nidx] = 1;
          frontier.push({nx, ny});
        }
      }
      std::sort(inst.pixels.begin(), inst.pixels.end(),
                [](PointI a, PointI b) {
                  return std::pair(a.y, a.x) < std::pair(b.y, b.x);
                });
      out.push_back(std::move(inst));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Instance& a, const Instance& b) {
                     return a.label < b.label;
                   });
  return out;
}

// Divide intensities by the format's maximum representable value
// (255 for 8-bit input).
inline std::vector<double> normalize_intensity(std::span<const double> image,
                                               double max_value = 255.0) {
  if (!(max_value > 0.0))
    throw invariant_error("normalize_intensity: max_value must be positive");
  std::vector<double> out;
  out.reserve(image.size());
  for (double v : image) out.push_back(v / max_value);
  return out;
}

// Sliding-window plan: square patches with a fixed per-axis overlap; the last
// origin per axis is clamped so every patch lies fully inside the image.
struct PatchGrid {
  int patch_size = 512;
  int stride = 0;
  std::vector<PointI> origins;  // row-major: y slow, x fast
};

namespace detail {

inline std::vector<int> axis_origins(int dim, int patch, int stride) {
  std::vector<int> origins;
  int p = 0;
  while (p + patch < dim) {
    origins.push_back(p);
    p += stride;
  }
  origins.push_back(dim - patch);
  return origins;
}

}  // namespace detail

inline PatchGrid patchify(int width, int height, int patch_size, int overlap) {
  if (patch_size <= 0) throw invariant_error("patchify: patch_size must be positive");
  if (patch_size > width || patch_size > height)
    throw invariant_error("patchify: patch larger than image");
  if (overlap < 0 || overlap >= patch_size)
    throw invariant_error("patchify: overlap must satisfy 0 <= overlap < patch_size");

  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.stride = patch_size - overlap;
  const auto xs = detail::axis_origins(width, patch_size, grid.stride);
  const auto ys = detail::axis_origins(height, patch_size, grid.stride);
  for (int y : ys)
    for (int x : xs) grid.origins.push_back({x, y});
  return grid;
}

inline LabelMap crop(const LabelMap& map, PointI origin, int patch_size) {
  if (origin.x < 0 || origin.y < 0 || origin.x + patch_size > map.width() ||
      origin.y + patch_size > map.height())
    throw invariant_error("crop: patch outside image");
  LabelMap out(patch_size, patch_size);
  for (int y = 0; y < patch_size; ++y)
    for (int x = 0; x < patch_size; ++x)
      out.at(x, y) = map.at(origin.x + x, origin.y + y);
  return out;
}

struct Patch {
  PointI origin;
  LabelMap data;
};

// Reassemble a full-size map. Where patches overlap, the patch whose origin
// comes later in row-major order wins.
inline LabelMap stitch(std::span<const Patch> patches, int width, int height) {
  LabelMap out(width, height);
  std::vector<char> covered(out.size(), 0);

  std::vector<std::size_t> order(patches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(patches[a].origin.y, patches[a].origin.x) <
           std::pair(patches[b].origin.y, patches[b].origin.x);
  });

  for (std::size_t i : order) {
    const Patch& patch = patches[i];
    if (patch.origin.x < 0 || patch.origin.y < 0 ||
        patch.origin.x + patch.data.width() > width ||
        patch.origin.y + patch.data.height() > height)
      throw invariant_error("stitch: patch outside image");
    for (int y = 0; y < patch.data.height(); ++y) {
      for (int x = 0; x < patch.data.width(); ++x) {
        out.at(patch.origin.x + x, patch.origin.y + y) = patch.data.at(x, y);
        covered[static_cast<std::size_t>(patch.origin.y + y) * width +
                patch.origin.x + x] = 1;
      }
    }
  }

  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (!covered[i])
      throw invariant_error("stitch: coverage gap at (" +
                            std::to_string(static_cast<int>(i) % width) + ", " +
                            std::to_string(static_cast<int>(i) / width) + ")");
  }
  return out;
}

}  // namespace dentobox
