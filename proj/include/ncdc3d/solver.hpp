#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncdc3d/model.hpp"

namespace ncdc {

struct SolverConfig {
  int workers = 0;                      // 0 = all hardware threads
  uint64_t node_budget = 500'000'000;   // search nodes + cell checks
  double time_budget_s = 0.0;           // 0 = off; wall limits are not
                                        // deterministic, node budgets are
  bool enumerate_infer = false;
};

struct SolverStats {
  uint64_t nodes = 0;        // deterministic effort metric
  uint64_t cell_checks = 0;
  double wall_s = 0.0;
};

enum class Outcome : uint8_t { Consistent, Inconsistent, NotFoundAtGrid,
                               Unknown };

const char* outcome_name(Outcome o);

struct Verdict {
  Outcome outcome = Outcome::Unknown;
  std::optional<Solution> solution;  // set when Consistent
  bool grid_complete = true;         // grid meets the 2|V|-1 bound
  bool budget_exhausted = false;     // cost may be suboptimal when set
  SolverStats stats;
};

struct Explanation {
  bool no_explanation = false;  // mandatory subset alone is inconsistent
  std::vector<std::pair<int, int>> violated;  // sorted object-index pairs
  std::pair<int, int> cost{0, 0};             // (level 2, level 1)
  std::optional<Solution> witness;
  bool grid_complete = true;
  bool budget_exhausted = false;
  SolverStats stats;
};

struct InferredPair {
  int target = -1, reference = -1;
  bool known = false;  // an existing relation or applied default
  std::vector<BasicRelation> relations;
};

struct InferResult {
  Outcome outcome = Outcome::Unknown;  // of the underlying check
  std::vector<InferredPair> pairs;
  std::optional<Solution> witness;
  bool grid_complete = true;
  bool budget_exhausted = false;  // enumeration may be partial when set
  SolverStats stats;
};

// Grid override when present, else the smallest cube that decides the
// continuous problem (side 2|V|-1).
GridSpec grid_for(const Network& net);

// Decides consistency over the grid; defaults either hold exactly or are
// dropped at level-1 cost 1 (ab-marked endpoints force a free drop).
// Witnesses are deterministic and independent of the worker count.
Verdict check(const Network& net, const SolverConfig& cfg = {});

// Minimum-cardinality set of non-mandatory constraints whose removal
// restores consistency (level 2), then minimal dropped defaults (level 1).
Explanation explain(const Network& net, const SolverConfig& cfg = {});

// Witness relation per requested unknown pair, or the complete set of
// relations realizable across drop-optimal solutions when
// cfg.enumerate_infer is set. Known pairs echo their relation.
InferResult infer(const Network& net, const SolverConfig& cfg = {});

// ---------------------------------------------------------------------------
// Search primitives, exposed for direct testing.
// ---------------------------------------------------------------------------

struct EndpointConfig {
  std::vector<MBB> boxes;  // candidate bounding box per object index
};

struct EffConstraint {
  int target = -1, reference = -1;
  BasicRelation tiles;
  // When set, the target must meet every tile but may also occupy others
  // (condition C1 without C2).
  bool c1_only = false;
};

struct EffectiveNetwork {
  std::vector<EffConstraint> constraints;
};

// Cells inside the object's candidate box whose tile with respect to every
// enforced C1+C2 constraint's reference box belongs to that constraint's
// tile set. Ascending (x, y, z) order.
std::vector<Cell> allowed_cells(int object, const EndpointConfig& cfg,
                                const EffectiveNetwork& eff);

// Disconnected mode or non-target: the full allowed set, when it touches
// all six faces of the candidate box and meets every required tile.
// Connected targets: one face-touching, tile-meeting 6-connected component
// of the allowed set. Connected non-targets: the full candidate box.
std::optional<SpatialObject> feasible_object(int object,
                                             const EndpointConfig& cfg,
                                             const EffectiveNetwork& eff,
                                             bool connected_mode,
                                             bool is_target);

// Duplicates a network k times over disjoint object sets (copy 1 keeps the
// original names); the scaling scheme used by the bench harness.
Network replicate_network(const Network& net, int copies);

}  // namespace ncdc
