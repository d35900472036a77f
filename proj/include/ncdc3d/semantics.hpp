#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ncdc3d/model.hpp"

namespace ncdc {

// Discretized semantics over a cell grid. All functions are pure.

// Componentwise min/max of the cells.
MBB mbb_of(const SpatialObject& obj);

// Band of value relative to [lo, hi].
inline Third third_of(int value, int lo, int hi) {
  if (value < lo) return Third::Lo;
  if (value > hi) return Third::Hi;
  return Third::Mid;
}

// The unique tile of `ref` that contains `cell`.
SingleTile tile_of(Cell cell, const MBB& ref);

// Per-axis coordinate intervals of one tile of `ref` inside `grid`.
// An empty interval (lo > hi) means the tile holds no cells.
struct TileRegion {
  std::array<int, 3> lo{};
  std::array<int, 3> hi{};
  bool empty() const {
    return lo[0] > hi[0] || lo[1] > hi[1] || lo[2] > hi[2];
  }
  bool contains(Cell c) const {
    return lo[0] <= c.x && c.x <= hi[0] && lo[1] <= c.y && c.y <= hi[1] &&
           lo[2] <= c.z && c.z <= hi[2];
  }
  long long cell_count() const {
    if (empty()) return 0;
    return 1LL * (hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1) *
           (hi[2] - lo[2] + 1);
  }
};

TileRegion tile_region(SingleTile tile, const MBB& ref, const GridSpec& grid);

// The exact basic relation of a with respect to b: the set of tiles of
// mbb(b) that a's cells occupy.
BasicRelation relation_of(const SpatialObject& a, const SpatialObject& b);

// True iff relation_of(a, b) equals rel (conditions C1 and C2 together).
bool satisfies_basic(const SpatialObject& a, const SpatialObject& b,
                     const BasicRelation& rel);

// Index of the unique satisfied disjunct, if any.
std::optional<size_t> satisfies_disjunctive(
    const SpatialObject& a, const SpatialObject& b,
    std::span<const BasicRelation> disjuncts);

// Face-adjacency (6-neighborhood) reachability over the whole cell set.
bool is_connected(const SpatialObject& obj);

}  // namespace ncdc
