#include "ncdc3d/semantics.hpp"

#include <algorithm>
#include <set>

namespace ncdc {

MBB mbb_of(const SpatialObject& obj) {
  MBB box;
  for (int a = 0; a < 3; ++a) {
    box.lo[a] = 32767;
    box.hi[a] = -32768;
  }
  for (const Cell& c : obj.cells) {
    for (int a = 0; a < 3; ++a) {
      int v = c.coord(a);
      box.lo[a] = static_cast<int16_t>(std::min<int>(box.lo[a], v));
      box.hi[a] = static_cast<int16_t>(std::max<int>(box.hi[a], v));
    }
  }
  return box;
}

namespace {

Planar planar_of(Third xt, Third yt) {
  static constexpr Planar table[3][3] = {
      // yt: Lo            Mid         Hi
      {Planar::SW, Planar::W, Planar::NW},  // xt == Lo
      {Planar::S, Planar::O, Planar::N},    // xt == Mid
      {Planar::SE, Planar::E, Planar::NE},  // xt == Hi
  };
  return table[int(xt)][int(yt)];
}

Level level_of(Third zt) {
  switch (zt) {
    case Third::Lo: return Level::B;
    case Third::Hi: return Level::A;
    default: return Level::M;
  }
}

// [lo, hi] of one third of [ref_lo, ref_hi] clipped to [1, size].
std::pair<int, int> third_interval(Third t, int ref_lo, int ref_hi, int size) {
  switch (t) {
    case Third::Lo: return {1, std::min(ref_lo - 1, size)};
    case Third::Mid: return {std::max(ref_lo, 1), std::min(ref_hi, size)};
    default: return {std::max(ref_hi + 1, 1), size};
  }
}

}  // namespace

SingleTile tile_of(Cell cell, const MBB& ref) {
  Third xt = third_of(cell.x, ref.lo[0], ref.hi[0]);
  Third yt = third_of(cell.y, ref.lo[1], ref.hi[1]);
  Third zt = third_of(cell.z, ref.lo[2], ref.hi[2]);
  return SingleTile(planar_of(xt, yt), level_of(zt));
}

TileRegion tile_region(SingleTile tile, const MBB& ref, const GridSpec& grid) {
  TileRegion r;
  for (int a = 0; a < 3; ++a) {
    auto [lo, hi] =
        third_interval(tile.axis_third(a), ref.lo[a], ref.hi[a], grid.axis(a));
    r.lo[a] = lo;
    r.hi[a] = hi;
  }
  return r;
}

BasicRelation relation_of(const SpatialObject& a, const SpatialObject& b) {
  MBB box = mbb_of(b);
  BasicRelation rel;
  for (const Cell& c : a.cells) rel.add(tile_of(c, box));
  return rel;
}

bool satisfies_basic(const SpatialObject& a, const SpatialObject& b,
                     const BasicRelation& rel) {
  return relation_of(a, b) == rel;
}

std::optional<size_t> satisfies_disjunctive(
    const SpatialObject& a, const SpatialObject& b,
    std::span<const BasicRelation> disjuncts) {
  BasicRelation actual = relation_of(a, b);
  for (size_t i = 0; i < disjuncts.size(); ++i) {
    if (disjuncts[i] == actual) return i;
  }
  return std::nullopt;
}

bool is_connected(const SpatialObject& obj) {
  if (obj.cells.empty()) return false;
  std::set<Cell> pending(obj.cells.begin(), obj.cells.end());
  std::vector<Cell> stack{*pending.begin()};
  pending.erase(pending.begin());
  while (!stack.empty()) {
    Cell c = stack.back();
    stack.pop_back();
    static constexpr int d[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                    {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
    for (const auto& dd : d) {
      Cell nb{static_cast<int16_t>(c.x + dd[0]),
              static_cast<int16_t>(c.y + dd[1]),
              static_cast<int16_t>(c.z + dd[2])};
      auto it = pending.find(nb);
      if (it != pending.end()) {
        stack.push_back(nb);
        pending.erase(it);
      }
    }
  }
  return pending.empty();
}

}  // namespace ncdc
