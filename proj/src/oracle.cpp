#include "ncdc3d/oracle.hpp"

#include <algorithm>
#include <functional>

#include "ncdc3d/semantics.hpp"

namespace ncdc {

namespace {

struct GridIndex {
  GridSpec grid;
  std::vector<Cell> cells;  // ascending (x, y, z)

  explicit GridIndex(const GridSpec& g) : grid(g) {
    for (int x = 1; x <= g.m; ++x)
      for (int y = 1; y <= g.n; ++y)
        for (int z = 1; z <= g.p; ++z)
          cells.push_back({int16_t(x), int16_t(y), int16_t(z)});
  }

  SpatialObject object_of(uint32_t mask) const {
    SpatialObject o;
    for (size_t i = 0; i < cells.size(); ++i) {
      if (mask >> i & 1u) o.cells.push_back(cells[i]);
    }
    return o;
  }
};

// relation_of for every (target mask, reference mask) pair, precomputed via
// a per-reference classification of the grid cells.
struct RelationTable {
  int n_cells;
  std::vector<uint32_t> rel;  // rel[a * masks + b], masks = 2^n_cells

  RelationTable(const GridIndex& gi) : n_cells(int(gi.cells.size())) {
    int masks = 1 << n_cells;
    rel.assign(size_t(masks) * masks, 0);
    std::vector<uint8_t> tile_of_cell(n_cells);
    for (int b = 1; b < masks; ++b) {
      SpatialObject ob = gi.object_of(uint32_t(b));
      MBB box = mbb_of(ob);
      for (int i = 0; i < n_cells; ++i) {
        tile_of_cell[i] = uint8_t(tile_of(gi.cells[i], box).index());
      }
      for (int a = 1; a < masks; ++a) {
        uint32_t r = 0;
        for (int i = 0; i < n_cells; ++i) {
          if (a >> i & 1) r |= 1u << tile_of_cell[i];
        }
        rel[size_t(a) * masks + b] = r;
      }
    }
  }

  uint32_t operator()(int a, int b) const {
    return rel[size_t(a) << n_cells | unsigned(b)];
  }
};

struct IndexedConstraint {
  int target, reference;
  const Relation* relation;
  bool is_default;
  bool satisfied_by(uint32_t rel_bits) const {
    for (const auto& d : relation->disjuncts) {
      if (d.bits == rel_bits) return true;
    }
    return false;
  }
};

struct Problem {
  const Network& net;
  GridIndex gi;
  RelationTable table;
  std::vector<IndexedConstraint> hard;      // basic + disjunctive
  std::vector<IndexedConstraint> defaults;  // non-ab defaults
  std::vector<DroppedDefault> ab_dropped;

  Problem(const Network& net_, const GridSpec& grid)
      : net(net_), gi(grid), table(gi) {
    for (const auto& c : net.constraints) {
      IndexedConstraint ic{net.index_of(c.target), net.index_of(c.reference),
                           &c.relation,
                           c.relation.kind == RelationKind::Default};
      if (!ic.is_default) {
        hard.push_back(ic);
      } else if (net.ab_marks.count(c.target) ||
                 net.ab_marks.count(c.reference)) {
        ab_dropped.push_back({ic.target, ic.reference, true});
      } else {
        defaults.push_back(ic);
      }
    }
  }
};

void check_caps(const Network& net, const GridSpec& grid) {
  require_valid(net);
  if (net.objects.size() > kOracleMaxObjects) {
    throw CapExceeded{"oracle supports at most 3 objects"};
  }
  if (grid.cell_count() > kOracleMaxCells) {
    throw CapExceeded{"oracle supports at most 8 grid cells"};
  }
}

// Walks every assignment in lexicographic bitmask order, pruning as soon
// as a hard constraint among the assigned prefix fails. visit() returns
// the number of unsatisfied defaults and may stop the walk by returning
// false from keep_going.
struct Enumerator {
  const Problem& pb;
  int n_objects;
  int masks;
  std::vector<int> chosen;
  // hard constraints grouped by the later of their two endpoints
  std::vector<std::vector<const IndexedConstraint*>> hard_at;

  explicit Enumerator(const Problem& pb_)
      : pb(pb_),
        n_objects(int(pb.net.objects.size())),
        masks(1 << pb.gi.cells.size()),
        chosen(n_objects, 0),
        hard_at(n_objects) {
    for (const auto& c : pb.hard) {
      hard_at[std::max(c.target, c.reference)].push_back(&c);
    }
  }

  // visit(assignment) -> keep_going
  void run(const std::function<bool(const std::vector<int>&)>& visit) {
    walk(0, visit);
  }

 private:
  bool walk(int depth, const std::function<bool(const std::vector<int>&)>& v) {
    if (depth == n_objects) return v(chosen);
    for (int mask = 1; mask < masks; ++mask) {
      chosen[depth] = mask;
      bool ok = true;
      for (const auto* c : hard_at[depth]) {
        if (!c->satisfied_by(pb.table(chosen[c->target],
                                      chosen[c->reference]))) {
          ok = false;
          break;
        }
      }
      if (ok && !walk(depth + 1, v)) return false;
    }
    return true;
  }
};

int count_drops(const Problem& pb, const std::vector<int>& assignment) {
  int drops = 0;
  for (const auto& d : pb.defaults) {
    if (!d.satisfied_by(pb.table(assignment[d.target],
                                 assignment[d.reference]))) {
      ++drops;
    }
  }
  return drops;
}

Solution make_solution(const Problem& pb, const std::vector<int>& assignment,
                       int drops) {
  Solution sol;
  sol.grid = pb.gi.grid;
  for (int mask : assignment) sol.assignment.push_back(pb.gi.object_of(mask));
  sol.dropped_defaults = pb.ab_dropped;
  for (const auto& d : pb.defaults) {
    if (!d.satisfied_by(pb.table(assignment[d.target],
                                 assignment[d.reference]))) {
      sol.dropped_defaults.push_back({d.target, d.reference, false});
    }
  }
  std::sort(sol.dropped_defaults.begin(), sol.dropped_defaults.end());
  sol.cost = {0, drops};
  return sol;
}

}  // namespace

OracleVerdict oracle_check(const Network& net, const GridSpec& grid) {
  check_caps(net, grid);
  Problem pb(net, grid);
  Enumerator en(pb);

  bool found = false;
  int best_drops = int(pb.defaults.size()) + 1;
  std::vector<int> best;
  en.run([&](const std::vector<int>& assignment) {
    int drops = count_drops(pb, assignment);
    if (!found || drops < best_drops) {
      found = true;
      best_drops = drops;
      best = assignment;
    }
    return best_drops > 0;  // drop count 0 cannot be improved
  });

  OracleVerdict v;
  v.consistent = found;
  if (found) v.solution = make_solution(pb, best, best_drops);
  return v;
}

OracleExplanation oracle_optimal_explanation(const Network& net,
                                             const GridSpec& grid) {
  check_caps(net, grid);

  std::vector<size_t> removable;  // indices of non-mandatory rel/disj
  for (size_t i = 0; i < net.constraints.size(); ++i) {
    const auto& c = net.constraints[i];
    if (c.relation.kind != RelationKind::Default && !c.mandatory) {
      removable.push_back(i);
    }
  }
  if (removable.size() > kOracleMaxNonMandatory) {
    throw CapExceeded{"oracle explanation supports at most 12 removable "
                      "constraints"};
  }

  auto without = [&](uint32_t removed_mask) {
    Network reduced = net;
    reduced.constraints.clear();
    for (size_t i = 0; i < net.constraints.size(); ++i) {
      bool removed = false;
      for (size_t k = 0; k < removable.size(); ++k) {
        if (removable[k] == i && (removed_mask >> k & 1u)) removed = true;
      }
      if (!removed) reduced.constraints.push_back(net.constraints[i]);
    }
    return reduced;
  };

  OracleExplanation out;
  for (size_t size = 0; size <= removable.size(); ++size) {
    for (uint32_t mask = 0; mask < (1u << removable.size()); ++mask) {
      if (unsigned(__builtin_popcount(mask)) != size) continue;
      if (oracle_check(without(mask), grid).consistent) {
        std::vector<std::pair<int, int>> set;
        for (size_t k = 0; k < removable.size(); ++k) {
          if (mask >> k & 1u) {
            const auto& c = net.constraints[removable[k]];
            set.push_back({net.index_of(c.target), net.index_of(c.reference)});
          }
        }
        std::sort(set.begin(), set.end());
        out.optimal_sets.push_back(std::move(set));
      }
    }
    if (!out.optimal_sets.empty()) {
      out.min_cost = int(size);
      return out;
    }
  }
  out.no_explanation = true;
  return out;
}

std::set<BasicRelation> oracle_infer_all(const Network& net,
                                         const GridSpec& grid,
                                         const std::string& target,
                                         const std::string& reference) {
  check_caps(net, grid);
  Problem pb(net, grid);
  int u = net.index_of(target), v = net.index_of(reference);
  if (u < 0 || v < 0 || u == v) {
    throw CapExceeded{"inference pair must name two distinct objects"};
  }

  int best_drops = -1;
  {
    Enumerator en(pb);
    en.run([&](const std::vector<int>& assignment) {
      int drops = count_drops(pb, assignment);
      if (best_drops < 0 || drops < best_drops) best_drops = drops;
      return best_drops != 0;
    });
  }
  std::set<BasicRelation> out;
  if (best_drops < 0) return out;  // inconsistent

  Enumerator en(pb);
  en.run([&](const std::vector<int>& assignment) {
    if (count_drops(pb, assignment) == best_drops) {
      out.insert(BasicRelation(pb.table(assignment[u], assignment[v])));
    }
    return true;
  });
  return out;
}

}  // namespace ncdc
