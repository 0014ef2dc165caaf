#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "dentobox/errors.hpp"
#include "dentobox/labelmap.hpp"

namespace dentobox {

// Freeman 8-direction codes with y growing downward:
// 0=E, 1=NE, 2=N, 3=NW, 4=W, 5=SW, 6=S, 7=SE.
inline constexpr std::array<int, 8> kFreemanDx{1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr std::array<int, 8> kFreemanDy{0, -1, -1, -1, 0, 1, 1, 1};

struct ChainCode {
  PointI start;
  std::vector<int> moves;
};

// Per-label adjacency: how many of the region's border pixels touch each
// label in their 8-neighborhood. The region's own label never appears.
struct NeighborProfile {
  std::map<int, int> counts;
};

enum class DissolveCase { background = 1, single_label = 2, majority = 3 };

inline std::string dissolve_case_name(DissolveCase c) {
  switch (c) {
    case DissolveCase::background: return "I";
    case DissolveCase::single_label: return "II";
    case DissolveCase::majority: return "III";
  }
  return "?";
}

struct Resolution {
  int target = 0;
  DissolveCase dissolve_case = DissolveCase::background;
};

struct ChangeRecord {
  int label = 0;
  int area = 0;
  DissolveCase dissolve_case = DissolveCase::background;
  int new_label = 0;
};

struct PostprocessResult {
  LabelMap map;
  std::vector<ChangeRecord> changes;
};

namespace detail {

struct RegionLookup {
  int width;
  int height;
  std::unordered_set<long long> pixels;

  explicit RegionLookup(const Instance& region, int w, int h)
      : width(w), height(h) {
    pixels.reserve(region.pixels.size() * 2);
    for (const PointI& p : region.pixels)
      pixels.insert(static_cast<long long>(p.y) * width + p.x);
  }

  bool contains(PointI p) const {
    return p.x >= 0 && p.x < width && p.y >= 0 && p.y < height &&
           pixels.count(static_cast<long long>(p.y) * width + p.x) > 0;
  }
};

inline int freeman_code(PointI from, PointI to) {
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  for (int k = 0; k < 8; ++k)
    if (kFreemanDx[k] == dx && kFreemanDy[k] == dy) return k;
  throw invariant_error("freeman_code: pixels are not 8-adjacent");
}

}  // namespace detail

// Pixels of the region with at least one non-region 8-neighbor, or lying on
// the image edge. Sorted row-major.
inline std::vector<PointI> border_pixels(const Instance& region, int width,
                                         int height) {
  detail::RegionLookup lookup(region, width, height);
  std::vector<PointI> out;
  for (const PointI& p : region.pixels) {
    bool border = p.x == 0 || p.y == 0 || p.x == width - 1 || p.y == height - 1;
    for (int k = 0; !border && k < 8; ++k)
      border = !lookup.contains({p.x + kNeighborDx[k], p.y + kNeighborDy[k]});
    if (border) out.push_back(p);
  }
  return out;
}

// Moore boundary trace, clockwise, starting at the region's top-left-most
// pixel. The walk terminates when it is about to repeat its first step out of
// the start pixel, so thin regions (bars, dominoes) close correctly.
inline ChainCode trace_border(const Instance& region, int width, int height) {
  if (region.pixels.empty()) throw invariant_error("trace_border: empty region");
  detail::RegionLookup lookup(region, width, height);

  const PointI start = region.pixels.front();
  ChainCode chain{start, {}};
  if (region.pixels.size() == 1) return chain;

  // Clockwise scan order around a pixel (screen orientation, y down).
  static constexpr std::array<int, 8> cw_dx{0, 1, 1, 1, 0, -1, -1, -1};
  static constexpr std::array<int, 8> cw_dy{-1, -1, 0, 1, 1, 1, 0, -1};
  auto cw_index = [](PointI c, PointI b) {
    for (int k = 0; k < 8; ++k)
      if (c.x + cw_dx[k] == b.x && c.y + cw_dy[k] == b.y) return k;
    throw invariant_error("trace_border: backtrack not adjacent");
  };
  // Scan clockwise starting after the backtrack position; returns the next
  // region pixel and the last background position scanned before it.
  auto next_step = [&](PointI c, PointI b) {
    const int k0 = cw_index(c, b);
    PointI last_bg = b;
    for (int i = 1; i <= 8; ++i) {
      const int k = (k0 + i) % 8;
      const PointI p{c.x + cw_dx[k], c.y + cw_dy[k]};
      if (lookup.contains(p)) return std::pair(p, last_bg);
      last_bg = p;
    }
    return std::pair(c, b);
  };

  // The pixel west of the row-major-first pixel is never part of the region.
  const PointI b0{start.x - 1, start.y};
  PointI cur = start;
  PointI back = b0;
  PointI first_next{};
  PointI first_bg{};
  const std::size_t limit = 4 * region.pixels.size() + 8;
  while (chain.moves.size() < limit) {
    const auto [next, bg] = next_step(cur, back);
    if (next == cur) break;  // no neighbor; unreachable for connected regions
    if (chain.moves.empty()) {
      first_next = next;
      first_bg = bg;
    } else if (cur == start && next == first_next && bg == first_bg) {
      break;  // closed: about to repeat the first transition
    }
    chain.moves.push_back(detail::freeman_code(cur, next));
    cur = next;
    back = bg;
  }
  return chain;
}

// Count, per label, the border pixels whose 8-neighborhood touches that
// label. Neighbors inside the region and out-of-image neighbors are ignored.
inline NeighborProfile neighbor_profile(const Instance& region,
                                        const LabelMap& map) {
  detail::RegionLookup lookup(region, map.width(), map.height());
  NeighborProfile profile;
  for (const PointI& p : border_pixels(region, map.width(), map.height())) {
    std::set<int> seen;
    for (int k = 0; k < 8; ++k) {
      const PointI n{p.x + kNeighborDx[k], p.y + kNeighborDy[k]};
      if (!map.in_bounds(n.x, n.y) || lookup.contains(n)) continue;
      seen.insert(map.at(n.x, n.y));
    }
    for (int label : seen) ++profile.counts[label];
  }
  return profile;
}

// Case I: only background around -> dissolve into background.
// Case II: background plus one label -> that label.
// Case III: two or more labels -> the most frequent one; ties go to the
// lowest label id.
inline Resolution resolve(const NeighborProfile& profile) {
  if (profile.counts.empty())
    throw invariant_error("resolve: empty neighbor profile");
  int best = -1;
  int best_count = -1;
  int nonzero = 0;
  for (const auto& [label, count] : profile.counts) {
    if (label == 0) continue;
    ++nonzero;
    if (count > best_count) {  // std::map iterates ascending, so ties keep the lowest id
      best = label;
      best_count = count;
    }
  }
  if (nonzero == 0) return {0, DissolveCase::background};
  if (nonzero == 1) return {best, DissolveCase::single_label};
  return {best, DissolveCase::majority};
}

inline int resolve_region(const NeighborProfile& profile) {
  return resolve(profile).target;
}

// Dissolve every duplicate-label component except the largest one per label.
// Unwanted regions are handled in descending area order and the neighbor
// profile is recomputed against the partially updated map, so cascades
// resolve deterministically. The pre-existing largest component of each
// label is pinned and never relabeled.
inline PostprocessResult postprocess(const LabelMap& input) {
  PostprocessResult result{input, {}};

  // Representative pixel of each duplicated label's original largest
  // component (area, then earliest top-left pixel in row-major order).
  std::map<int, PointI> keeper;
  {
    const auto instances = extract_instances(input);
    std::map<int, const Instance*> best;
    std::map<int, int> multiplicity;
    for (const Instance& inst : instances) {
      ++multiplicity[inst.label];
      auto& slot = best[inst.label];
      if (!slot || inst.area() > slot->area()) slot = &inst;
    }
    for (const auto& [label, count] : multiplicity)
      if (count >= 2) keeper[label] = best[label]->pixels.front();
  }

  for (;;) {
    const auto instances = extract_instances(result.map);
    std::map<int, int> multiplicity;
    for (const Instance& inst : instances) ++multiplicity[inst.label];

    // Largest candidate first; ties fall to the earliest instance in
    // (label, row-major first pixel) order, which is the iteration order.
    const Instance* pick = nullptr;
    for (const Instance& inst : instances) {
      if (multiplicity[inst.label] < 2) continue;
      const auto rep = keeper.find(inst.label);
      if (rep != keeper.end() && inst.contains(rep->second)) continue;
      if (!pick || inst.area() > pick->area()) pick = &inst;
    }
    if (!pick) break;

    const Resolution res = resolve(neighbor_profile(*pick, result.map));
    for (const PointI& p : pick->pixels)
      result.map.at(p.x, p.y) = static_cast<std::uint8_t>(res.target);
    result.changes.push_back(
        {pick->label, pick->area(), res.dissolve_case, res.target});
  }
  return result;
}

}  // namespace dentobox
