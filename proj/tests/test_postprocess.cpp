#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include <dentobox/postprocess.hpp>

#include "helpers.hpp"

using namespace dentobox;
using testutil::map_from;

namespace {

const Instance& instance_of(const std::vector<Instance>& all, int label,
                            int index = 0) {
  int seen = 0;
  for (const Instance& inst : all)
    if (inst.label == label && seen++ == index) return inst;
  FAIL("no such instance");
  return all.front();
}

std::set<PointI> replay(const ChainCode& chain) {
  std::set<PointI> visited{chain.start};
  PointI cur = chain.start;
  for (int move : chain.moves) {
    cur = {cur.x + kFreemanDx[move], cur.y + kFreemanDy[move]};
    visited.insert(cur);
  }
  return visited;
}

LabelMap random_blob_map(std::mt19937& rng) {
  std::uniform_int_distribution<int> w(3, 9), h(3, 9), x(0, 35), y(0, 25);
  std::uniform_int_distribution<int> label(1, 5), blobs(6, 12);
  LabelMap m(45, 35);
  const int n = blobs(rng);
  for (int i = 0; i < n; ++i) {
    const int bw = w(rng), bh = h(rng), bx = x(rng), by = y(rng);
    const std::uint8_t v = static_cast<std::uint8_t>(label(rng));
    for (int yy = by; yy < std::min(35, by + bh); ++yy)
      for (int xx = bx; xx < std::min(45, bx + bw); ++xx) m.at(xx, yy) = v;
  }
  return m;
}

}  // namespace

TEST_CASE("border pixels by definition") {
  SECTION("single pixel") {
    const LabelMap m = map_from({"...", ".1.", "..."});
    const auto inst = extract_instances(m);
    const auto border = border_pixels(inst[0], 3, 3);
    REQUIRE(border.size() == 1);
    CHECK(border[0] == PointI{1, 1});
  }
  SECTION("2x2 square: all four are border") {
    const LabelMap m = map_from({"11..", "11..", "...."});
    const auto inst = extract_instances(m);
    CHECK(border_pixels(inst[0], 4, 3).size() == 4);
  }
  SECTION("3x3 square: center excluded") {
    const LabelMap m = map_from({".....", ".111.", ".111.", ".111.", "....."});
    const auto inst = extract_instances(m);
    const auto border = border_pixels(inst[0], 5, 5);
    CHECK(border.size() == 8);
    for (const PointI& p : border) CHECK_FALSE(p == PointI{2, 2});
  }
  SECTION("image-edge pixels are border even when fully surrounded") {
    const LabelMap m = map_from({"111", "111", "111"});
    const auto inst = extract_instances(m);
    // The 8 edge pixels qualify via the image boundary; the center of the
    // full 3x3 map touches neither background nor the edge.
    const auto border = border_pixels(inst[0], 3, 3);
    CHECK(border.size() == 8);
    for (const PointI& p : border) CHECK_FALSE(p == PointI{1, 1});
  }
  SECTION("plus shape: the center pixel still touches background diagonally") {
    const LabelMap m = map_from({".....", "..1..", ".111.", "..1..", "....."});
    const auto inst = extract_instances(m);
    CHECK(border_pixels(inst[0], 5, 5).size() == 5);
  }
}

TEST_CASE("chain code on canonical shapes") {
  SECTION("single pixel: start only, no moves") {
    const LabelMap m = map_from({"...", ".1.", "..."});
    const auto chain = trace_border(extract_instances(m)[0], 3, 3);
    CHECK(chain.start == PointI{1, 1});
    CHECK(chain.moves.empty());
  }
  SECTION("2x2 square: closed 4-move clockwise chain") {
    const LabelMap m = map_from({"11", "11"});
    const auto chain = trace_border(extract_instances(m)[0], 2, 2);
    CHECK(chain.start == PointI{0, 0});
    // E, S, W, N in Freeman codes (y down).
    CHECK(chain.moves == std::vector<int>{0, 6, 4, 2});
  }
  SECTION("1x3 bar: out and back") {
    const LabelMap m = map_from({"111"});
    const auto chain = trace_border(extract_instances(m)[0], 3, 1);
    CHECK(chain.moves == std::vector<int>{0, 0, 4, 4});
  }
  SECTION("3x3 square: 8-move closed chain visiting exactly the border") {
    const LabelMap m = map_from({"111", "111", "111"});
    const auto inst = extract_instances(m)[0];
    const auto chain = trace_border(inst, 3, 3);
    CHECK(chain.moves.size() == 8);
    const auto visited = replay(chain);
    CHECK(visited.size() == 8);
    CHECK_FALSE(visited.count(PointI{1, 1}));
  }
}

TEST_CASE("chain replay stays on border pixels and closes") {
  std::mt19937 rng(321);
  for (int round = 0; round < 25; ++round) {
    const LabelMap m = random_blob_map(rng);
    for (const Instance& inst : extract_instances(m)) {
      const auto chain = trace_border(inst, m.width(), m.height());
      const auto border = border_pixels(inst, m.width(), m.height());
      const std::set<PointI> border_set(border.begin(), border.end());
      PointI cur = chain.start;
      REQUIRE(border_set.count(cur));
      for (int move : chain.moves) {
        cur = {cur.x + kFreemanDx[move], cur.y + kFreemanDy[move]};
        REQUIRE(border_set.count(cur));
      }
      if (!chain.moves.empty()) CHECK(cur == chain.start);
    }
  }
}

TEST_CASE("neighbor profile counts adjacent labels per border pixel") {
  SECTION("isolated region sees only background") {
    const LabelMap m = map_from({".....", ".11..", ".11..", "....."});
    const auto profile = neighbor_profile(extract_instances(m)[0], m);
    REQUIRE(profile.counts.size() == 1);
    CHECK(profile.counts.at(0) == 4);
  }
  SECTION("region touching one label plus background") {
    const LabelMap m = map_from({
        ".....",
        "77...",
        "771..",
        "771..",
        ".....",
    });
    const auto inst = instance_of(extract_instances(m), 1);
    const auto profile = neighbor_profile(inst, m);
    CHECK(profile.counts.count(0) == 1);
    CHECK(profile.counts.count(7) == 1);
    CHECK(profile.counts.size() == 2);
    CHECK(profile.counts.at(7) == 2);  // both pixels of the bar touch a 7
  }
  SECTION("region fully embedded inside another label") {
    const LabelMap m = map_from({
        "77777",
        "77177",
        "77777",
    });
    const auto inst = instance_of(extract_instances(m), 1);
    const auto profile = neighbor_profile(inst, m);
    REQUIRE(profile.counts.size() == 1);
    CHECK(profile.counts.at(7) == 1);
  }
  SECTION("own label never appears even across a gap in the same instance") {
    const LabelMap m = map_from({
        "11.11",
    });
    // Two separate label-1 instances; profile of the left one must not
    // count label 1 even though the right instance is nearby (not adjacent).
    const auto inst = instance_of(extract_instances(m), 1, 0);
    const auto profile = neighbor_profile(inst, m);
    CHECK(profile.counts.count(1) == 0);
  }
  SECTION("a second component of the same label in the 8-neighborhood counts") {
    // Components (y-separated) of the same label are different instances;
    // dissolving by own-label is forbidden, so the profile excludes only the
    // region's own pixels — other same-label pixels are still "neighbors"
    // but must never dominate; the map here keeps them non-adjacent.
    const LabelMap m = map_from({
        "1.1",
    });
    const auto left = instance_of(extract_instances(m), 1, 0);
    const auto profile = neighbor_profile(left, m);
    REQUIRE(profile.counts.size() == 1);
    CHECK(profile.counts.count(0) == 1);
  }
}

TEST_CASE("resolve applies the three dissolution cases") {
  NeighborProfile p;
  SECTION("Case I: only background") {
    p.counts = {{0, 12}};
    const Resolution r = resolve(p);
    CHECK(r.target == 0);
    CHECK(r.dissolve_case == DissolveCase::background);
    CHECK(dissolve_case_name(r.dissolve_case) == "I");
  }
  SECTION("Case II: background plus one label") {
    p.counts = {{0, 4}, {7, 9}};
    const Resolution r = resolve(p);
    CHECK(r.target == 7);
    CHECK(r.dissolve_case == DissolveCase::single_label);
    CHECK(dissolve_case_name(r.dissolve_case) == "II");
  }
  SECTION("Case II even when the label is rarer than background") {
    p.counts = {{0, 9}, {7, 4}};
    CHECK(resolve(p).target == 7);
  }
  SECTION("Case III: most frequent nonzero label wins") {
    p.counts = {{7, 5}, {8, 3}};
    const Resolution r = resolve(p);
    CHECK(r.target == 7);
    CHECK(r.dissolve_case == DissolveCase::majority);
    CHECK(dissolve_case_name(r.dissolve_case) == "III");
  }
  SECTION("Case III ignores background in the count comparison") {
    p.counts = {{0, 100}, {6, 2}, {9, 3}};
    CHECK(resolve(p).target == 9);
  }
  SECTION("Case III tie: lowest label id") {
    p.counts = {{8, 4}, {6, 4}};
    CHECK(resolve(p).target == 6);
  }
  SECTION("empty profile is an error") {
    p.counts = {};
    CHECK_THROWS_AS(resolve(p), invariant_error);
  }
  CHECK(resolve_region(NeighborProfile{{{0, 3}, {5, 1}}}) == 5);
}

TEST_CASE("postprocess Case I: isolated duplicate dissolves into background") {
  LabelMap m(20, 12);
  for (int y = 1; y < 11; ++y)
    for (int x = 1; x < 11; ++x) m.at(x, y) = 7;  // area 100, the keeper
  // Small isolated 5-pixel plus of label 7.
  m.at(15, 5) = m.at(14, 5) = m.at(16, 5) = m.at(15, 4) = m.at(15, 6) = 7;

  const PostprocessResult r = postprocess(m);
  for (int y = 0; y < 12; ++y)
    for (int x = 13; x < 20; ++x) CHECK(r.map.at(x, y) == 0);
  CHECK(r.map.at(5, 5) == 7);  // keeper untouched

  REQUIRE(r.changes.size() == 1);
  CHECK(r.changes[0].label == 7);
  CHECK(r.changes[0].area == 5);
  CHECK(r.changes[0].dissolve_case == DissolveCase::background);
  CHECK(r.changes[0].new_label == 0);
}

TEST_CASE("postprocess Case II: duplicate surrounded by one label joins it") {
  const LabelMap m = map_from({
      "66666.....",
      "66766.....",
      "66666.7777",
  });
  const PostprocessResult r = postprocess(m);
  CHECK(r.map.at(2, 1) == 6);
  CHECK(r.map.at(6, 2) == 7);  // larger 7 bar survives
  REQUIRE(r.changes.size() == 1);
  CHECK(r.changes[0].label == 7);
  CHECK(r.changes[0].area == 1);
  CHECK(r.changes[0].dissolve_case == DissolveCase::single_label);
  CHECK(r.changes[0].new_label == 6);
}

TEST_CASE("postprocess Case III: wedged duplicate joins the majority neighbor") {
  // Unwanted 7-bar at x = 3 touches label 6 with 5 border pixels and label 8
  // with 3; the larger 7 block on the right is the keeper.
  const LabelMap m = map_from({
      "66678..",
      "66678..",
      "6667.77",
      "6667.77",
      "6667.77",
  });
  const auto instances = extract_instances(m);
  const auto& bar = instance_of(instances, 7, 0);
  REQUIRE(bar.area() == 5);
  const auto profile = neighbor_profile(bar, m);
  CHECK(profile.counts.at(6) == 5);
  CHECK(profile.counts.at(8) == 3);
  CHECK(profile.counts.at(0) == 4);

  const PostprocessResult r = postprocess(m);
  for (int y = 0; y < 5; ++y) CHECK(r.map.at(3, y) == 6);
  REQUIRE(r.changes.size() == 1);
  CHECK(r.changes[0].label == 7);
  CHECK(r.changes[0].area == 5);
  CHECK(r.changes[0].dissolve_case == DissolveCase::majority);
  CHECK(r.changes[0].new_label == 6);
}

TEST_CASE("postprocess keeps clean maps unchanged") {
  const LabelMap m = map_from({
      "11..22",
      "11..22",
      "......",
      "3333..",
  });
  const PostprocessResult r = postprocess(m);
  CHECK(r.map == m);
  CHECK(r.changes.empty());
}

TEST_CASE("postprocess equal-area duplicates keep the row-major-first one") {
  const LabelMap m = map_from({
      "55.55",
  });
  const PostprocessResult r = postprocess(m);
  CHECK(r.map.at(0, 0) == 5);
  CHECK(r.map.at(1, 0) == 5);
  CHECK(r.map.at(3, 0) == 0);
  CHECK(r.map.at(4, 0) == 0);
  REQUIRE(r.changes.size() == 1);
  CHECK(r.changes[0].new_label == 0);
}

TEST_CASE("postprocess cascades recompute profiles against the updated map") {
  // Two touching duplicates: the 5-bar dissolves into its only labeled
  // neighbor 6 first (Case II), which grows the unwanted 6-bar to area 4;
  // that merged region then sees only background and dissolves (Case I).
  // The recorded area of the second change proves the profile was taken
  // against the updated map.
  const LabelMap m = map_from({
      "44444.65..",
      "44444.65..",
      "..........",
      "666666.555",
      "666666.555",
  });
  const PostprocessResult r = postprocess(m);

  std::map<int, int> comps;
  for (const Instance& inst : extract_instances(r.map)) ++comps[inst.label];
  for (const auto& [label, count] : comps) CHECK(count == 1);
  for (int y = 0; y < 2; ++y)
    for (int x = 6; x < 8; ++x) CHECK(r.map.at(x, y) == 0);

  REQUIRE(r.changes.size() == 2);
  CHECK(r.changes[0].label == 5);
  CHECK(r.changes[0].area == 2);
  CHECK(r.changes[0].dissolve_case == DissolveCase::single_label);
  CHECK(r.changes[0].new_label == 6);
  CHECK(r.changes[1].label == 6);
  CHECK(r.changes[1].area == 4);
  CHECK(r.changes[1].dissolve_case == DissolveCase::background);
  CHECK(r.changes[1].new_label == 0);
}

TEST_CASE("postprocess properties on randomized multi-blob maps") {
  std::mt19937 rng(2026);
  for (int round = 0; round < 100; ++round) {
    const LabelMap input = random_blob_map(rng);

    // Remember each label's original largest component.
    std::map<int, const Instance*> largest;
    const auto original = extract_instances(input);
    for (const Instance& inst : original) {
      auto& slot = largest[inst.label];
      if (!slot || inst.area() > slot->area()) slot = &inst;
    }

    const PostprocessResult r = postprocess(input);

    // At most one component per label.
    std::map<int, int> comps;
    for (const Instance& inst : extract_instances(r.map)) ++comps[inst.label];
    for (const auto& [label, count] : comps) REQUIRE(count <= 1);

    // Pixel count conserved.
    REQUIRE(r.map.size() == input.size());

    // The pre-existing largest component of every label is untouched.
    for (const auto& [label, inst] : largest)
      for (const PointI& p : inst->pixels)
        REQUIRE(r.map.at(p.x, p.y) == label);

    // Idempotence.
    const PostprocessResult again = postprocess(r.map);
    REQUIRE(again.map == r.map);
    REQUIRE(again.changes.empty());

    // Every change's target came from a real case decision.
    for (const ChangeRecord& c : r.changes) {
      REQUIRE(c.label >= 1);
      REQUIRE(c.new_label != c.label);
      REQUIRE(c.area >= 1);
    }
  }
}
