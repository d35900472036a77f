#pragma once

#include <set>
#include <string>
#include <vector>

#include "ncdc3d/model.hpp"

namespace ncdc {

// Exhaustive reference implementations over tiny grids. Each object ranges
// over every non-empty cell subset, so the caps below keep the enumeration
// under ~1e8 elementary checks. Deliberately serial and simple: this is the
// ground truth the search-based solver is tested against.

struct CapExceeded {
  std::string message;
};

struct OracleVerdict {
  bool consistent = false;
  Solution solution;  // meaningful only when consistent
};

struct OracleExplanation {
  bool no_explanation = false;  // the mandatory subset alone is inconsistent
  int min_cost = 0;             // level-2 cost
  // Every violated set achieving min_cost, as (target, reference) index
  // pairs sorted within each set; sets in enumeration order.
  std::vector<std::vector<std::pair<int, int>>> optimal_sets;
};

inline constexpr size_t kOracleMaxObjects = 3;
inline constexpr long long kOracleMaxCells = 8;
inline constexpr size_t kOracleMaxNonMandatory = 12;

// Consistent iff some assignment of non-empty cell sets satisfies every
// non-default constraint; defaults are evaluated at the best drop count.
// Enumeration order is fixed (lexicographic by cell bitmask), so the
// returned witness is reproducible.
OracleVerdict oracle_check(const Network& net, const GridSpec& grid);

// Exact minimum number of violated non-mandatory constraints over all
// subsets, with every optimal subset.
OracleExplanation oracle_optimal_explanation(const Network& net,
                                             const GridSpec& grid);

// All basic relations realizable between the pair across drop-optimal
// solutions on this grid. Empty when the network is inconsistent.
std::set<BasicRelation> oracle_infer_all(const Network& net,
                                         const GridSpec& grid,
                                         const std::string& target,
                                         const std::string& reference);

}  // namespace ncdc
