#include "ncdc3d/solver.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

#include "ncdc3d/semantics.hpp"

namespace ncdc {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Consistent: return "consistent";
    case Outcome::Inconsistent: return "inconsistent";
    case Outcome::NotFoundAtGrid: return "not_found";
    default: return "unknown";
  }
}

GridSpec grid_for(const Network& net) {
  if (net.grid_override) return *net.grid_override;
  int side = std::max(1, 2 * static_cast<int>(net.objects.size()) - 1);
  return GridSpec{side, side, side};
}

namespace {

using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// Budget: a pool of search nodes consumed by the sequential solve phases.
// Parallel chunks receive the remaining pool as a per-chunk quota, so
// whether one is cut depends on its own subtree only and verdicts, costs
// and witnesses are identical for any worker count.
// ---------------------------------------------------------------------------

struct Budget {
  uint64_t pool = 0;
  uint64_t used = 0;
  bool has_deadline = false;
  Clock::time_point deadline;
  bool cut = false;

  bool spend(uint64_t n) {
    used += n;
    if (pool < n) {
      pool = 0;
      cut = true;
      return false;
    }
    pool -= n;
    if (has_deadline && Clock::now() > deadline) {
      cut = true;
      return false;
    }
    return true;
  }
};

struct Quota {
  uint64_t left = 0;
  uint64_t used = 0;
  bool has_deadline = false;
  Clock::time_point deadline;
  bool cut = false;
  // set when a sibling chunk with a smaller index already succeeded
  const std::atomic<int>* watch = nullptr;
  int my_chunk = 0;
  bool aborted = false;

  bool tick(uint64_t n = 1) {
    used += n;
    if (left < n || cut) {
      left = 0;
      cut = true;
      return false;
    }
    left -= n;
    if ((used & 0x3ffu) == 0 && watch &&
        my_chunk > watch->load(std::memory_order_relaxed)) {
      aborted = true;
      cut = true;
      return false;
    }
    if (has_deadline && (used & 0x1fffu) == 0 && Clock::now() > deadline) {
      cut = true;
      return false;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Tile classification (same convention as semantics.cpp).
// ---------------------------------------------------------------------------

constexpr int kPlanarIdx[3][3] = {{6, 3, 0}, {7, 4, 1}, {8, 5, 2}};
constexpr int kLevelIdx[3] = {2, 0, 1};

inline int third_idx(int v, int lo, int hi) {
  return v < lo ? 0 : v > hi ? 2 : 1;
}

inline int tile_index(int xt, int yt, int zt) {
  return kPlanarIdx[xt][yt] * 3 + kLevelIdx[zt];
}

// ---------------------------------------------------------------------------
// Compiled network.
// ---------------------------------------------------------------------------

struct HardConstraint {
  int target = -1, reference = -1;
  std::vector<BasicRelation> options;  // the disjuncts; basic has one
  bool mandatory = false;
};

struct DefaultConstraint {
  int target = -1, reference = -1;
  BasicRelation tiles;
};

struct Compiled {
  const Network* net = nullptr;
  GridSpec grid;
  int n = 0;
  std::vector<HardConstraint> hard;
  std::vector<DefaultConstraint> defaults;  // ab-forced drops removed
  std::vector<DroppedDefault> ab_dropped;
  std::vector<EffConstraint> extras;  // virtual probe constraints
  std::vector<char> is_target;        // appears as target in the network
  bool connected = false;
};

Compiled compile(const Network& net, GridSpec grid) {
  require_valid(net);
  Compiled c;
  c.net = &net;
  c.grid = grid;
  c.n = static_cast<int>(net.objects.size());
  c.connected = net.connected_mode;
  c.is_target.assign(c.n, 0);
  for (const auto& k : net.constraints) {
    int t = net.index_of(k.target), r = net.index_of(k.reference);
    c.is_target[t] = 1;
    if (k.relation.kind == RelationKind::Default) {
      if (net.ab_marks.count(k.target) || net.ab_marks.count(k.reference)) {
        c.ab_dropped.push_back({t, r, true});
      } else {
        c.defaults.push_back({t, r, k.relation.disjuncts[0]});
      }
    } else {
      c.hard.push_back({t, r, k.relation.disjuncts, k.mandatory});
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Per-axis admissibility of endpoint pairs. A satisfied C1+C2 constraint
// pins the band of the target's infimum to the lowest band present in the
// relation's thirds on that axis, and the supremum to the highest; a
// C1-only constraint just needs each band to be reachable.
// ---------------------------------------------------------------------------

struct AxisCond {
  bool full = true;
  uint8_t lo_pos = 1, hi_pos = 1;
  bool need_lo = false, need_mid = false, need_hi = false;
};

AxisCond make_axis_cond(const BasicRelation& tiles, bool c1_only, int axis) {
  AxisCond c;
  uint8_t mask = tiles.thirds_mask(axis);
  c.full = !c1_only;
  if (!c1_only) {
    c.lo_pos = (mask & 1) ? 0 : (mask & 2) ? 1 : 2;
    c.hi_pos = (mask & 4) ? 2 : (mask & 2) ? 1 : 0;
  } else {
    c.need_lo = mask & 1;
    c.need_mid = mask & 2;
    c.need_hi = mask & 4;
  }
  return c;
}

inline bool axis_ok(const AxisCond& c, int tlo, int thi, int rlo, int rhi) {
  if (c.full) {
    return third_idx(tlo, rlo, rhi) == c.lo_pos &&
           third_idx(thi, rlo, rhi) == c.hi_pos;
  }
  if (c.need_lo && !(tlo < rlo)) return false;
  if (c.need_hi && !(thi > rhi)) return false;
  if (c.need_mid && !(std::max(tlo, rlo) <= std::min(thi, rhi))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Component search context. Endpoint values are canonical ranks: any grid
// solution compresses, axis by axis, onto ranks 1..min(axis, 2k-1), so a
// search over that range is complete for the grid.
// ---------------------------------------------------------------------------

constexpr int kMaxComp = 32;
constexpr int kMaxRank = 63;
constexpr int kMaxPairs = kMaxRank * (kMaxRank + 1) / 2;
constexpr int kDomWords = (kMaxPairs + 63) / 64;

struct PairTable {
  int count = 0;
  std::array<uint8_t, kMaxPairs> lo{}, hi{};

  void build(int rank_limit) {
    count = 0;
    for (int a = 1; a <= rank_limit; ++a) {
      for (int b = a; b <= rank_limit; ++b) {
        lo[count] = static_cast<uint8_t>(a);
        hi[count] = static_cast<uint8_t>(b);
        ++count;
      }
    }
  }
};

struct Dom {
  std::array<uint64_t, kDomWords> w{};
  int count = 0;

  void fill(int n) {
    w.fill(0);
    for (int i = 0; i < n; ++i) w[i >> 6] |= 1ull << (i & 63);
    count = n;
  }
  bool has(int i) const { return w[i >> 6] >> (i & 63) & 1ull; }
  void clear(int i) {
    if (w[i >> 6] >> (i & 63) & 1ull) {
      w[i >> 6] &= ~(1ull << (i & 63));
      --count;
    }
  }
  void restrict_to(int i) {
    w.fill(0);
    w[i >> 6] = 1ull << (i & 63);
    count = 1;
  }
  template <typename F>
  bool for_each(F&& f) const {  // ascending; stops early when f returns false
    for (int wi = 0; wi < kDomWords; ++wi) {
      uint64_t bits = w[wi];
      while (bits) {
        int i = wi * 64 + __builtin_ctzll(bits);
        bits &= bits - 1;
        if (!f(i)) return false;
      }
    }
    return true;
  }
};

struct LocalConstraint {
  int target = -1, reference = -1;  // component-local indices
  uint32_t tiles = 0;
  bool c1_only = false;
  AxisCond cond[3];
};

struct CompCtx {
  std::vector<int> members;  // local -> global object index
  GridSpec grid;
  int k = 0;
  int rank[3] = {1, 1, 1};
  PairTable pairs[3];
  std::vector<LocalConstraint> cons;
  std::vector<std::vector<int>> cons_of;                // by local target
  std::vector<std::vector<std::pair<int, int>>> edges;  // (other, cons id)
  std::vector<std::vector<int>> ref_of;  // targets that reference this obj
  std::vector<char> is_target;
  bool connected = false;

  void finish() {
    k = static_cast<int>(members.size());
    for (int a = 0; a < 3; ++a) {
      rank[a] = std::min({grid.axis(a), 2 * k - 1, kMaxRank});
      pairs[a].build(rank[a]);
    }
    cons_of.assign(k, {});
    edges.assign(k, {});
    ref_of.assign(k, {});
    for (size_t i = 0; i < cons.size(); ++i) {
      const auto& c = cons[i];
      cons_of[c.target].push_back(static_cast<int>(i));
      edges[c.target].push_back({c.reference, static_cast<int>(i)});
      edges[c.reference].push_back({c.target, static_cast<int>(i)});
    }
    for (int u = 0; u < k; ++u) {
      std::vector<char> seen(k, 0);
      for (int ci : cons_of[u]) {
        int v = cons[ci].reference;
        if (!seen[v]) {
          seen[v] = 1;
          ref_of[v].push_back(u);
        }
      }
    }
  }
};

struct Box {
  int lo[3] = {0, 0, 0};
  int hi[3] = {0, 0, 0};
};

// ---------------------------------------------------------------------------
// Cell-level analysis of one object. Given its candidate box and its
// references' boxes, the allowed set (cells whose tile per reference lies
// in the constraint's tile set) must reach all six faces and meet every
// required tile; in connected mode a single component must.
// ---------------------------------------------------------------------------

struct RefBox {
  Box box;
  uint32_t tiles = 0;
  bool c1_only = false;
};

struct CellCheckInput {
  Box box;
  std::vector<RefBox> refs;
  bool connected_target = false;
};

inline int classify(const Box& ref, int x, int y, int z) {
  return tile_index(third_idx(x, ref.lo[0], ref.hi[0]),
                    third_idx(y, ref.lo[1], ref.hi[1]),
                    third_idx(z, ref.lo[2], ref.hi[2]));
}

struct ObjectAnalysis {
  bool feasible = false;
  SpatialObject witness;
};

ObjectAnalysis analyze_object(const CellCheckInput& in, bool want_witness) {
  ObjectAnalysis out;
  const Box& B = in.box;
  const size_t nrefs = in.refs.size();

  std::vector<Cell> allowed;
  std::vector<uint32_t> hit(nrefs, 0);
  std::vector<int> tile_buf(nrefs, 0);
  bool face[3][2] = {};

  for (int x = B.lo[0]; x <= B.hi[0]; ++x) {
    for (int y = B.lo[1]; y <= B.hi[1]; ++y) {
      for (int z = B.lo[2]; z <= B.hi[2]; ++z) {
        bool banned = false;
        for (size_t i = 0; i < nrefs; ++i) {
          int t = classify(in.refs[i].box, x, y, z);
          tile_buf[i] = t;
          if (!in.refs[i].c1_only && !(in.refs[i].tiles >> t & 1u)) {
            banned = true;
            break;
          }
        }
        if (banned) continue;
        for (size_t i = 0; i < nrefs; ++i) hit[i] |= 1u << tile_buf[i];
        int v[3] = {x, y, z};
        for (int a = 0; a < 3; ++a) {
          if (v[a] == B.lo[a]) face[a][0] = true;
          if (v[a] == B.hi[a]) face[a][1] = true;
        }
        allowed.push_back({int16_t(x), int16_t(y), int16_t(z)});
      }
    }
  }

  auto met = [&](const bool f[3][2], const std::vector<uint32_t>& h) {
    for (int a = 0; a < 3; ++a) {
      if (!f[a][0] || !f[a][1]) return false;
    }
    for (size_t i = 0; i < nrefs; ++i) {
      if (in.refs[i].tiles & ~h[i]) return false;
    }
    return true;
  };

  if (!in.connected_target) {
    if (!met(face, hit)) return out;
    out.feasible = true;
    if (want_witness) {
      // Lexicographically smallest valid cell set: validity is monotone
      // under adding allowed cells, so it is the shortest ascending prefix
      // of the allowed set meeting every face and required tile.
      bool f[3][2] = {};
      std::vector<uint32_t> h(nrefs, 0);
      for (const Cell& c : allowed) {
        out.witness.cells.push_back(c);
        int v[3] = {c.x, c.y, c.z};
        for (int a = 0; a < 3; ++a) {
          if (v[a] == B.lo[a]) f[a][0] = true;
          if (v[a] == B.hi[a]) f[a][1] = true;
        }
        for (size_t i = 0; i < nrefs; ++i) {
          h[i] |= 1u << classify(in.refs[i].box, c.x, c.y, c.z);
        }
        if (met(f, h)) break;
      }
    }
    return out;
  }

  // Connected target: any valid connected subset extends to its maximal
  // component, so checking maximal components is complete.
  std::map<Cell, int> id;
  for (size_t i = 0; i < allowed.size(); ++i) id[allowed[i]] = int(i);
  std::vector<int> comp(allowed.size(), -1);
  int n_comp = 0;
  for (size_t s = 0; s < allowed.size(); ++s) {
    if (comp[s] >= 0) continue;
    int me = n_comp++;
    std::vector<int> stack{int(s)};
    comp[s] = me;
    while (!stack.empty()) {
      Cell c = allowed[stack.back()];
      stack.pop_back();
      static constexpr int d[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                      {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
      for (const auto& dd : d) {
        Cell nb{int16_t(c.x + dd[0]), int16_t(c.y + dd[1]),
                int16_t(c.z + dd[2])};
        auto it = id.find(nb);
        if (it != id.end() && comp[it->second] < 0) {
          comp[it->second] = me;
          stack.push_back(it->second);
        }
      }
    }
  }
  for (int cand = 0; cand < n_comp; ++cand) {
    bool f[3][2] = {};
    std::vector<uint32_t> h(nrefs, 0);
    for (size_t i = 0; i < allowed.size(); ++i) {
      if (comp[i] != cand) continue;
      const Cell& c = allowed[i];
      int v[3] = {c.x, c.y, c.z};
      for (int a = 0; a < 3; ++a) {
        if (v[a] == B.lo[a]) f[a][0] = true;
        if (v[a] == B.hi[a]) f[a][1] = true;
      }
      for (size_t r = 0; r < nrefs; ++r) {
        h[r] |= 1u << classify(in.refs[r].box, c.x, c.y, c.z);
      }
    }
    if (met(f, h)) {
      out.feasible = true;
      if (want_witness) {
        for (size_t i = 0; i < allowed.size(); ++i) {
          if (comp[i] == cand) out.witness.cells.push_back(allowed[i]);
        }
      }
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Backtracking search over endpoint configurations: MRV variable order,
// ascending value order, maintained arc consistency per axis, cell-level
// analysis of an object once all of its references are placed.
// ---------------------------------------------------------------------------

struct SearchState {
  const CompCtx* ctx = nullptr;
  Quota* quota = nullptr;
  uint64_t cell_checks = 0;

  Dom dom[kMaxComp][3];
  int pair_id[kMaxComp][3];
  Box box[kMaxComp];
  int unassigned = 0;

  struct TrailEntry {
    int obj, axis;
    Dom saved;
  };
  std::vector<TrailEntry> trail;

  void init(const CompCtx& c, Quota& q) {
    ctx = &c;
    quota = &q;
    unassigned = c.k;
    for (int u = 0; u < c.k; ++u) {
      for (int a = 0; a < 3; ++a) {
        dom[u][a].fill(c.pairs[a].count);
        pair_id[u][a] = -1;
      }
    }
  }

  bool assigned(int u) const { return pair_id[u][2] >= 0; }

  bool all_refs_assigned(int u) const {
    for (int ci : ctx->cons_of[u]) {
      if (!assigned(ctx->cons[ci].reference)) return false;
    }
    return true;
  }

  // Does value pu of u have support in w's domain (or fixed value) under
  // constraint c on this axis?
  bool supported(const LocalConstraint& c, int axis, int u, int pu,
                 int w) const {
    const PairTable& pt = ctx->pairs[axis];
    bool u_is_target = (c.target == u);
    auto ok_against = [&](int wlo, int whi) {
      return u_is_target
                 ? axis_ok(c.cond[axis], pt.lo[pu], pt.hi[pu], wlo, whi)
                 : axis_ok(c.cond[axis], wlo, whi, pt.lo[pu], pt.hi[pu]);
    };
    if (pair_id[w][axis] >= 0) {
      return ok_against(box[w].lo[axis], box[w].hi[axis]);
    }
    bool found = false;
    dom[w][axis].for_each([&](int pw) {
      found = ok_against(ctx->pairs[axis].lo[pw], ctx->pairs[axis].hi[pw]);
      return !found;
    });
    return found;
  }

  // Remove values of u without support against w on every constraint
  // between them. Returns false on wipe-out; sets *shrank on change.
  bool revise(int u, int w, int axis, bool* shrank) {
    Dom& du = dom[u][axis];
    Dom out = du;
    bool changed = false;
    for (const auto& [other, ci] : ctx->edges[u]) {
      if (other != w) continue;
      const auto& c = ctx->cons[ci];
      out.for_each([&](int pu) {
        if (!supported(c, axis, u, pu, w)) {
          out.clear(pu);
          changed = true;
        }
        return true;
      });
      if (out.count == 0) break;
    }
    if (changed) {
      trail.push_back({u, axis, du});
      du = out;
      *shrank = true;
    }
    return du.count > 0;
  }

  // Arc consistency over one axis, seeded by a changed object. The order
  // conditions are fully per-axis, so this runs as soon as that axis of
  // the seed is placed. Returns 1 (consistent), 0 (wipe-out) or 2 (cut).
  int ac3(int seed, int axis) {
    std::vector<int> queue{seed};
    std::vector<char> queued(ctx->k, 0);
    queued[seed] = 1;
    while (!queue.empty()) {
      int w = queue.back();
      queue.pop_back();
      queued[w] = 0;
      for (const auto& [u, ci] : ctx->edges[w]) {
        (void)ci;
        if (u == w || pair_id[u][axis] >= 0) continue;
        if (!quota->tick()) return 2;
        bool shrank = false;
        if (!revise(u, w, axis, &shrank)) return 0;
        if (shrank && !queued[u]) {
          queued[u] = 1;
          queue.push_back(u);
        }
      }
    }
    return 1;
  }

  // One initial fixpoint pass over every arc of every axis.
  int initial_ac() {
    for (int axis = 0; axis < 3; ++axis) {
      for (int u = 0; u < ctx->k; ++u) {
        int r = ac3(u, axis);
        if (r != 1) return r;
      }
    }
    return 1;
  }

  void undo_to(size_t mark) {
    while (trail.size() > mark) {
      auto& e = trail.back();
      dom[e.obj][e.axis] = e.saved;
      trail.pop_back();
    }
  }

  bool cell_check(int u, SpatialObject* witness_out) {
    ++cell_checks;
    CellCheckInput in;
    in.box = box[u];
    for (int ci : ctx->cons_of[u]) {
      const auto& c = ctx->cons[ci];
      in.refs.push_back({box[c.reference], c.tiles, c.c1_only});
    }
    in.connected_target = ctx->connected && ctx->is_target[u];
    ObjectAnalysis an = analyze_object(in, witness_out != nullptr);
    if (an.feasible && witness_out) *witness_out = std::move(an.witness);
    return an.feasible;
  }

  // 0 = exhausted, 1 = solution found (boxes hold the witness), 2 = cut.
  int dfs() {
    if (unassigned == 0) return 1;

    int pick = -1;
    uint64_t best = 0;
    for (int u = 0; u < ctx->k; ++u) {
      if (assigned(u)) continue;
      uint64_t prod =
          uint64_t(dom[u][0].count) * dom[u][1].count * dom[u][2].count;
      if (pick < 0 || prod < best) {
        pick = u;
        best = prod;
      }
    }
    if (best == 0) return 0;

    const PairTable* pt = ctx->pairs;
    auto place = [&](int axis, int id) {
      pair_id[pick][axis] = id;
      box[pick].lo[axis] = pt[axis].lo[id];
      box[pick].hi[axis] = pt[axis].hi[id];
    };

    int result = 0;
    --unassigned;
    dom[pick][0].for_each([&](int xid) {
      if (!quota->tick()) {
        result = 2;
        return false;
      }
      size_t mark_x = trail.size();
      place(0, xid);
      int px = ac3(pick, 0);
      if (px == 2) result = 2;
      if (px == 1) {
        dom[pick][1].for_each([&](int yid) {
          if (!quota->tick()) {
            result = 2;
            return false;
          }
          size_t mark_y = trail.size();
          place(1, yid);
          int py = ac3(pick, 1);
          if (py == 2) result = 2;
          if (py == 1) {
            dom[pick][2].for_each([&](int zid) {
              if (!quota->tick()) {
                result = 2;
                return false;
              }
              size_t mark_z = trail.size();
              place(2, zid);
              int pz = ac3(pick, 2);
              if (pz == 2) result = 2;
              if (pz == 1) step(pick, &result);
              if (result != 1) undo_to(mark_z);
              pair_id[pick][2] = -1;
              return result == 0;
            });
          }
          if (result != 1) undo_to(mark_y);
          pair_id[pick][1] = -1;
          return result == 0;
        });
      }
      if (result != 1) undo_to(mark_x);
      pair_id[pick][0] = -1;
      return result == 0;
    });
    ++unassigned;
    return result;
  }

 private:
  // pick is fully placed and propagated: run due cell checks, recurse.
  void step(int pick, int* result) {
    bool ok = true;
    if (!ctx->cons_of[pick].empty() && all_refs_assigned(pick)) {
      if (!quota->tick()) {
        *result = 2;
        ok = false;
      } else {
        ok = cell_check(pick, nullptr);
      }
    }
    if (ok) {
      // pick may have been the last missing reference of placed targets
      for (int u : ctx->ref_of[pick]) {
        if (u == pick || !assigned(u)) continue;
        if (!all_refs_assigned(u)) continue;
        if (!quota->tick()) {
          *result = 2;
          ok = false;
          break;
        }
        if (!cell_check(u, nullptr)) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      int r = dfs();
      if (r != 0) *result = r;
    }
  }
};

// ---------------------------------------------------------------------------
// Single-axis satisfiability probe: the endpoint CSP restricted to one
// axis. An empty axis refutes the whole configuration space cheaply.
// Objects hanging off the constraint graph as trees are eliminated by arc
// consistency (exact on trees); only the graph core is searched.
// ---------------------------------------------------------------------------

struct AxisProbe {
  const CompCtx& ctx;
  int axis;
  Quota& quota;
  std::vector<Dom> dom;
  std::vector<int> pair_of;
  std::vector<char> stripped;

  AxisProbe(const CompCtx& c, int a, Quota& q) : ctx(c), axis(a), quota(q) {
    dom.resize(c.k);
    for (auto& d : dom) d.fill(c.pairs[a].count);
    pair_of.assign(c.k, -1);
    stripped.assign(c.k, 0);
  }

  // true when values pu (for u) and pv (for v) satisfy every edge between
  // u and v on this axis
  bool compatible(int u, int pu, int v, int pv) const {
    const PairTable& pt = ctx.pairs[axis];
    for (const auto& [other, ci] : ctx.edges[u]) {
      if (other != v) continue;
      const auto& c = ctx.cons[ci];
      bool u_is_target = (c.target == u);
      bool ok = u_is_target
                    ? axis_ok(c.cond[axis], pt.lo[pu], pt.hi[pu], pt.lo[pv],
                              pt.hi[pv])
                    : axis_ok(c.cond[axis], pt.lo[pv], pt.hi[pv], pt.lo[pu],
                              pt.hi[pu]);
      if (!ok) return false;
    }
    return true;
  }

  // 0 unsat, 1 leaves stripped (core remains), 2 cut
  int strip_leaves() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int u = 0; u < ctx.k; ++u) {
        if (stripped[u]) continue;
        int neighbour = -1;
        bool leaf = true;
        for (const auto& [other, ci] : ctx.edges[u]) {
          (void)ci;
          if (other == u || stripped[other]) continue;
          if (neighbour < 0) neighbour = other;
          else if (neighbour != other) {
            leaf = false;
            break;
          }
        }
        if (!leaf) continue;
        if (neighbour < 0) {  // isolated: any value works
          if (dom[u].count == 0) return 0;
          stripped[u] = 1;
          changed = true;
          continue;
        }
        if (!quota.tick(uint64_t(dom[neighbour].count) + 1)) return 2;
        Dom out = dom[neighbour];
        dom[neighbour].for_each([&](int pv) {
          bool supported = false;
          dom[u].for_each([&](int pu) {
            supported = compatible(u, pu, neighbour, pv);
            return !supported;
          });
          if (!supported) out.clear(pv);
          return true;
        });
        dom[neighbour] = out;
        if (dom[neighbour].count == 0) return 0;
        stripped[u] = 1;
        changed = true;
      }
    }
    return 1;
  }

  int run() {  // 0 unsat, 1 sat, 2 cut
    int s = strip_leaves();
    if (s != 1) return s;
    return core_dfs();
  }

 private:
  int core_dfs() {
    int pick = -1;
    for (int u = 0; u < ctx.k; ++u) {
      if (stripped[u] || pair_of[u] >= 0) continue;
      if (pick < 0 || dom[u].count < dom[pick].count) pick = u;
    }
    if (pick < 0) return 1;
    if (dom[pick].count == 0) return 0;

    int result = 0;
    dom[pick].for_each([&](int id) {
      if (!quota.tick()) {
        result = 2;
        return false;
      }
      pair_of[pick] = id;
      std::vector<std::pair<int, Dom>> saved;
      bool ok = true;
      for (const auto& [other, ci] : ctx.edges[pick]) {
        (void)ci;
        if (other == pick || stripped[other] || pair_of[other] >= 0) continue;
        bool seen = false;
        for (const auto& [o2, d2] : saved) {
          (void)d2;
          seen |= o2 == other;
        }
        if (seen) continue;
        saved.push_back({other, dom[other]});
        Dom out = dom[other];
        dom[other].for_each([&](int pv) {
          if (!compatible(other, pv, pick, id)) out.clear(pv);
          return true;
        });
        dom[other] = out;
        if (dom[other].count == 0) {
          ok = false;
          break;
        }
      }
      if (ok) {
        int r = core_dfs();
        if (r != 0) result = r;
      }
      for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
        dom[it->first] = it->second;
      }
      pair_of[pick] = -1;
      return result == 0;
    });
    return result;
  }
};

// ---------------------------------------------------------------------------
// Parallel solve of one effective network. Chunks are the first object's
// x-axis pairs, processed with static budget slices and aggregated in
// chunk order, so the outcome does not depend on the worker count.
// ---------------------------------------------------------------------------

struct EffResult {
  int status = 0;  // 0 unsat, 1 sat, 2 cut
  std::vector<Box> boxes;
  uint64_t nodes = 0;
  uint64_t cell_checks = 0;
};

EffResult solve_effective(const CompCtx& ctx, Budget& budget, int workers) {
  EffResult out;

  for (int a = 0; a < 3; ++a) {
    Quota q{budget.pool, 0, budget.has_deadline, budget.deadline};
    AxisProbe probe(ctx, a, q);
    int r = probe.run();
    out.nodes += q.used;
    budget.spend(q.used);
    if (r == 2 || budget.cut) {
      out.status = 2;
      return out;
    }
    if (r == 0) return out;  // unsat
  }

  // One shared arc-consistency fixpoint before chunking.
  Quota seed_quota{budget.pool, 0, budget.has_deadline, budget.deadline};
  SearchState base;
  base.init(ctx, seed_quota);
  int ac = base.initial_ac();
  out.nodes += seed_quota.used;
  budget.spend(seed_quota.used);
  if (ac == 2 || budget.cut) {
    out.status = 2;
    return out;
  }
  if (ac == 0) return out;  // unsat

  // Chunks are the first object's x-axis pairs, processed in index order
  // by the workers. Every chunk gets the full remaining pool as its quota,
  // so whether a chunk is cut depends only on its own subtree; chunks above
  // the first successful index are aborted. Scanning in index order then
  // yields a verdict, witness and node count that are independent of the
  // worker count: every chunk at or below the winner ran to completion.
  const int n_chunks = ctx.pairs[0].count;
  std::vector<int> status(n_chunks, -1);  // 0/1/2 as usual, 3 = aborted
  std::vector<uint64_t> nodes(n_chunks, 0), checks(n_chunks, 0);
  std::vector<std::vector<Box>> sat_boxes(n_chunks);
  std::atomic<int> first_sat{n_chunks};
  const uint64_t snapshot = budget.pool;
  int n_threads = workers > 0 ? workers : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(n_threads)
  for (int chunk = 0; chunk < n_chunks; ++chunk) {
    if (chunk > first_sat.load(std::memory_order_relaxed)) {
      status[chunk] = 3;
      continue;
    }
    Quota q{snapshot, 0, budget.has_deadline, budget.deadline};
    q.watch = &first_sat;
    q.my_chunk = chunk;
    SearchState st;
    st.init(ctx, q);
    for (int u = 0; u < ctx.k; ++u) {
      for (int a = 0; a < 3; ++a) st.dom[u][a] = base.dom[u][a];
    }
    if (!st.dom[0][0].has(chunk)) {
      status[chunk] = 0;
      continue;
    }
    st.dom[0][0].restrict_to(chunk);
    int r = st.dfs();
    nodes[chunk] = q.used;
    checks[chunk] = st.cell_checks;
    status[chunk] = (r == 2 && q.aborted) ? 3 : r;
    if (r == 1) {
      sat_boxes[chunk].assign(st.box, st.box + ctx.k);
      int expect = first_sat.load();
      while (chunk < expect &&
             !first_sat.compare_exchange_weak(expect, chunk)) {
      }
    }
  }

  // An aborted chunk implies a successful chunk with a smaller index, so
  // the scan below never reads one before reaching the winner.
  uint64_t spent = 0;
  for (int chunk = 0; chunk < n_chunks; ++chunk) {
    spent += nodes[chunk];
    out.cell_checks += checks[chunk];
    if (status[chunk] == 1) {
      out.status = 1;
      out.boxes = sat_boxes[chunk];
      break;
    }
    if (status[chunk] == 2 || status[chunk] == 3) {
      out.status = 2;
      break;
    }
  }
  out.nodes += spent;
  budget.spend(spent);
  if (out.status == 0 && budget.cut) out.status = 2;
  return out;
}

// ---------------------------------------------------------------------------
// Component-level solve. Disjunct choices and default drops are the
// outermost decisions; drop subsets are explored in ascending size, so the
// first satisfiable combination carries the minimal level-1 cost.
// ---------------------------------------------------------------------------

struct ComponentSpec {
  std::vector<int> members;  // global object ids
  std::vector<int> hard_ids;
  std::vector<int> default_ids;
  std::vector<int> extra_ids;
};

struct ComponentResult {
  int status = 0;  // 0 inconsistent, 1 consistent, 2 cut
  bool cut_seen = false;
  int drops = 0;
  std::vector<int> dropped_default_ids;
  std::vector<Box> boxes;            // by member position
  std::vector<LocalConstraint> eff;  // winning effective constraints
  uint64_t nodes = 0;
  uint64_t cell_checks = 0;
};

std::vector<ComponentSpec> split_components(const Compiled& c,
                                            const std::vector<char>& hard_on) {
  std::vector<int> parent(c.n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

  for (size_t i = 0; i < c.hard.size(); ++i) {
    if (hard_on[i]) unite(c.hard[i].target, c.hard[i].reference);
  }
  for (const auto& d : c.defaults) unite(d.target, d.reference);
  for (const auto& e : c.extras) unite(e.target, e.reference);

  std::map<int, ComponentSpec> by_root;
  for (int u = 0; u < c.n; ++u) by_root[find(u)].members.push_back(u);
  for (size_t i = 0; i < c.hard.size(); ++i) {
    if (hard_on[i]) {
      by_root[find(c.hard[i].target)].hard_ids.push_back(int(i));
    }
  }
  for (size_t i = 0; i < c.defaults.size(); ++i) {
    by_root[find(c.defaults[i].target)].default_ids.push_back(int(i));
  }
  for (size_t i = 0; i < c.extras.size(); ++i) {
    by_root[find(c.extras[i].target)].extra_ids.push_back(int(i));
  }

  std::vector<ComponentSpec> out;
  for (auto& [root, spec] : by_root) {
    if (!spec.hard_ids.empty() || !spec.default_ids.empty() ||
        !spec.extra_ids.empty()) {
      out.push_back(std::move(spec));
    }
  }
  return out;
}

ComponentResult solve_component(const Compiled& c, const ComponentSpec& spec,
                                const std::vector<char>& hard_on,
                                Budget& budget, int workers) {
  ComponentResult out;
  if (spec.members.size() > kMaxComp) {
    out.status = 2;  // beyond the supported component size
    out.cut_seen = true;
    return out;
  }

  std::map<int, int> local;
  for (size_t i = 0; i < spec.members.size(); ++i) {
    local[spec.members[i]] = static_cast<int>(i);
  }

  std::vector<int> active_hard;
  for (int hi : spec.hard_ids) {
    if (hard_on[hi]) active_hard.push_back(hi);
  }

  const int n_defaults = static_cast<int>(spec.default_ids.size());
  if (n_defaults > 20) {  // 2^n drop subsets; refuse rather than overflow
    out.status = 2;
    out.cut_seen = true;
    return out;
  }
  std::vector<uint32_t> drop_masks;
  for (int d = 0; d <= n_defaults; ++d) {
    for (uint32_t mask = 0; mask < (1u << n_defaults); ++mask) {
      if (__builtin_popcount(mask) == d) drop_masks.push_back(mask);
    }
  }

  auto build_ctx = [&](uint32_t drop_mask, const std::vector<int>& choice) {
    CompCtx ctx;
    ctx.members = spec.members;
    ctx.grid = c.grid;
    ctx.connected = c.connected;
    auto add = [&](int t, int r, const BasicRelation& rel, bool c1_only) {
      LocalConstraint lc;
      lc.target = local.at(t);
      lc.reference = local.at(r);
      lc.tiles = rel.bits;
      lc.c1_only = c1_only;
      for (int a = 0; a < 3; ++a) lc.cond[a] = make_axis_cond(rel, c1_only, a);
      ctx.cons.push_back(lc);
    };
    for (size_t i = 0; i < active_hard.size(); ++i) {
      const auto& h = c.hard[active_hard[i]];
      add(h.target, h.reference, h.options[choice[i]], false);
    }
    for (int i = 0; i < n_defaults; ++i) {
      if (drop_mask >> i & 1u) continue;
      const auto& d = c.defaults[spec.default_ids[i]];
      add(d.target, d.reference, d.tiles, false);
    }
    for (int ei : spec.extra_ids) {
      const auto& e = c.extras[ei];
      add(e.target, e.reference, e.tiles, e.c1_only);
    }
    ctx.is_target.assign(spec.members.size(), 0);
    for (size_t i = 0; i < spec.members.size(); ++i) {
      ctx.is_target[i] = c.is_target[spec.members[i]];
    }
    ctx.finish();
    return ctx;
  };

  for (uint32_t drop_mask : drop_masks) {
    std::vector<int> choice(active_hard.size(), 0);
    while (true) {
      if (!budget.spend(1)) {
        out.status = 2;
        out.cut_seen = true;
        return out;
      }
      CompCtx ctx = build_ctx(drop_mask, choice);
      EffResult r = solve_effective(ctx, budget, workers);
      out.nodes += r.nodes;
      out.cell_checks += r.cell_checks;
      if (r.status == 1) {
        out.status = 1;
        out.drops = __builtin_popcount(drop_mask);
        for (int i = 0; i < n_defaults; ++i) {
          if (drop_mask >> i & 1u) {
            out.dropped_default_ids.push_back(spec.default_ids[i]);
          }
        }
        out.boxes = std::move(r.boxes);
        out.eff = std::move(ctx.cons);
        return out;
      }
      if (r.status == 2) out.cut_seen = true;

      int pos = static_cast<int>(choice.size()) - 1;
      while (pos >= 0) {
        if (++choice[pos] < int(c.hard[active_hard[pos]].options.size())) {
          break;
        }
        choice[pos] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
  out.status = out.cut_seen ? 2 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Witness assembly and independent re-verification.
// ---------------------------------------------------------------------------

void extract_witness(const Compiled& c, const ComponentSpec& spec,
                     const ComponentResult& res, Solution& sol) {
  std::vector<std::vector<int>> cons_of(spec.members.size());
  for (size_t ci = 0; ci < res.eff.size(); ++ci) {
    cons_of[res.eff[ci].target].push_back(static_cast<int>(ci));
  }
  for (size_t i = 0; i < spec.members.size(); ++i) {
    int g = spec.members[i];
    bool target = c.is_target[g];
    CellCheckInput in;
    in.box = res.boxes[i];
    for (int ci : cons_of[i]) {
      const auto& lc = res.eff[ci];
      in.refs.push_back({res.boxes[lc.reference], lc.tiles, lc.c1_only});
    }
    in.connected_target = c.connected && target;
    if (c.connected && !target) {
      // free construction inside the candidate box
      SpatialObject full;
      for (int x = in.box.lo[0]; x <= in.box.hi[0]; ++x)
        for (int y = in.box.lo[1]; y <= in.box.hi[1]; ++y)
          for (int z = in.box.lo[2]; z <= in.box.hi[2]; ++z)
            full.cells.push_back({int16_t(x), int16_t(y), int16_t(z)});
      sol.assignment[g] = std::move(full);
      continue;
    }
    ObjectAnalysis an = analyze_object(in, true);
    if (!an.feasible) {
      throw std::logic_error("internal error: witness extraction failed");
    }
    sol.assignment[g] = std::move(an.witness);
  }
}

void verify_solution(const Compiled& c,
                     const std::vector<const ComponentResult*>& results,
                     const std::vector<const ComponentSpec*>& specs,
                     const Solution& sol) {
  for (size_t s = 0; s < specs.size(); ++s) {
    for (const auto& lc : results[s]->eff) {
      const SpatialObject& a = sol.assignment[specs[s]->members[lc.target]];
      const SpatialObject& b =
          sol.assignment[specs[s]->members[lc.reference]];
      BasicRelation actual = relation_of(a, b);
      bool ok = lc.c1_only ? (lc.tiles & ~actual.bits) == 0
                           : actual.bits == lc.tiles;
      if (!ok) throw std::logic_error("internal error: witness re-check");
    }
  }
  if (c.connected) {
    for (int u = 0; u < c.n; ++u) {
      if (c.is_target[u] && !is_connected(sol.assignment[u])) {
        throw std::logic_error("internal error: witness connectivity");
      }
    }
  }
}

struct SolveOutcome {
  Outcome outcome = Outcome::Unknown;
  Solution solution;
  bool budget_exhausted = false;
  uint64_t nodes = 0;
  uint64_t cell_checks = 0;
};

SolveOutcome run_check(const Compiled& c, Budget& budget, int workers) {
  SolveOutcome out;
  std::vector<char> hard_on(c.hard.size(), 1);
  auto components = split_components(c, hard_on);

  std::vector<ComponentResult> results;
  results.reserve(components.size());
  bool any_cut = false, any_unsat = false;
  for (const auto& spec : components) {
    results.push_back(solve_component(c, spec, hard_on, budget, workers));
    const auto& r = results.back();
    out.nodes += r.nodes;
    out.cell_checks += r.cell_checks;
    any_cut |= r.cut_seen;
    if (r.status == 0) {
      any_unsat = true;
      break;
    }
  }

  if (any_unsat) {
    out.outcome = Outcome::Inconsistent;
    out.budget_exhausted = any_cut;
    return out;
  }
  if (results.size() < components.size() ||
      std::any_of(results.begin(), results.end(),
                  [](const ComponentResult& r) { return r.status == 2; })) {
    out.outcome = Outcome::Unknown;
    out.budget_exhausted = true;
    return out;
  }

  out.outcome = Outcome::Consistent;
  out.budget_exhausted = any_cut;
  Solution sol;
  sol.grid = c.grid;
  sol.assignment.assign(c.n, SpatialObject{{{1, 1, 1}}});
  sol.dropped_defaults = c.ab_dropped;
  int drops = 0;
  std::vector<const ComponentResult*> rptrs;
  std::vector<const ComponentSpec*> sptrs;
  for (size_t i = 0; i < components.size(); ++i) {
    extract_witness(c, components[i], results[i], sol);
    drops += results[i].drops;
    for (int di : results[i].dropped_default_ids) {
      sol.dropped_defaults.push_back(
          {c.defaults[di].target, c.defaults[di].reference, false});
    }
    rptrs.push_back(&results[i]);
    sptrs.push_back(&components[i]);
  }
  std::sort(sol.dropped_defaults.begin(), sol.dropped_defaults.end());
  sol.cost = {0, drops};
  verify_solution(c, rptrs, sptrs, sol);
  out.solution = std::move(sol);
  return out;
}

Budget make_budget(const SolverConfig& cfg) {
  Budget b;
  b.pool = cfg.node_budget;
  if (cfg.time_budget_s > 0) {
    b.has_deadline = true;
    b.deadline = Clock::now() + std::chrono::microseconds(
                                    uint64_t(cfg.time_budget_s * 1e6));
  }
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public search primitives.
// ---------------------------------------------------------------------------

namespace {

Box to_box(const MBB& b) {
  Box out;
  for (int a = 0; a < 3; ++a) {
    out.lo[a] = b.lo[a];
    out.hi[a] = b.hi[a];
  }
  return out;
}

CellCheckInput make_input(int object, const EndpointConfig& cfg,
                          const EffectiveNetwork& eff) {
  CellCheckInput in;
  in.box = to_box(cfg.boxes[object]);
  for (const auto& c : eff.constraints) {
    if (c.target == object) {
      in.refs.push_back({to_box(cfg.boxes[c.reference]), c.tiles.bits,
                         c.c1_only});
    }
  }
  return in;
}

}  // namespace

std::vector<Cell> allowed_cells(int object, const EndpointConfig& cfg,
                                const EffectiveNetwork& eff) {
  CellCheckInput in = make_input(object, cfg, eff);
  std::vector<Cell> out;
  for (int x = in.box.lo[0]; x <= in.box.hi[0]; ++x) {
    for (int y = in.box.lo[1]; y <= in.box.hi[1]; ++y) {
      for (int z = in.box.lo[2]; z <= in.box.hi[2]; ++z) {
        bool ok = true;
        for (const auto& r : in.refs) {
          if (!r.c1_only && !(r.tiles >> classify(r.box, x, y, z) & 1u)) {
            ok = false;
            break;
          }
        }
        if (ok) out.push_back({int16_t(x), int16_t(y), int16_t(z)});
      }
    }
  }
  return out;
}

std::optional<SpatialObject> feasible_object(int object,
                                             const EndpointConfig& cfg,
                                             const EffectiveNetwork& eff,
                                             bool connected_mode,
                                             bool is_target) {
  if (connected_mode && !is_target) {
    const MBB& b = cfg.boxes[object];
    SpatialObject full;
    for (int x = b.lo[0]; x <= b.hi[0]; ++x)
      for (int y = b.lo[1]; y <= b.hi[1]; ++y)
        for (int z = b.lo[2]; z <= b.hi[2]; ++z)
          full.cells.push_back({int16_t(x), int16_t(y), int16_t(z)});
    return full;
  }
  CellCheckInput in = make_input(object, cfg, eff);
  in.connected_target = connected_mode && is_target;
  ObjectAnalysis an = analyze_object(in, connected_mode);
  if (!an.feasible) return std::nullopt;
  if (connected_mode) return an.witness;
  SpatialObject full;
  full.cells = allowed_cells(object, cfg, eff);
  return full;
}

// ---------------------------------------------------------------------------
// Public operations.
// ---------------------------------------------------------------------------

Verdict check(const Network& net, const SolverConfig& cfg) {
  auto t0 = Clock::now();
  GridSpec grid = grid_for(net);
  Compiled compiled = compile(net, grid);
  Budget budget = make_budget(cfg);
  SolveOutcome r = run_check(compiled, budget, cfg.workers);

  Verdict v;
  v.grid_complete = grid.complete_for(net.objects.size());
  v.outcome = r.outcome;
  if (r.outcome == Outcome::Inconsistent && !v.grid_complete) {
    v.outcome = Outcome::NotFoundAtGrid;
  }
  if (r.outcome == Outcome::Consistent) v.solution = std::move(r.solution);
  v.budget_exhausted = r.budget_exhausted;
  v.stats.nodes = r.nodes;
  v.stats.cell_checks = r.cell_checks;
  v.stats.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return v;
}

Explanation explain(const Network& net, const SolverConfig& cfg) {
  auto t0 = Clock::now();
  GridSpec grid = grid_for(net);
  Compiled compiled = compile(net, grid);
  Budget budget = make_budget(cfg);

  Explanation ex;
  ex.grid_complete = grid.complete_for(net.objects.size());

  std::vector<char> all_on(compiled.hard.size(), 1);
  auto components = split_components(compiled, all_on);

  int total_violated = 0, total_drops = 0;
  std::vector<std::pair<int, int>> violated;
  std::vector<ComponentResult> kept;
  kept.reserve(components.size());
  std::vector<const ComponentResult*> rptrs;
  std::vector<const ComponentSpec*> sptrs;

  Solution sol;
  sol.grid = grid;
  sol.assignment.assign(compiled.n, SpatialObject{{{1, 1, 1}}});
  sol.dropped_defaults = compiled.ab_dropped;

  for (const auto& spec : components) {
    // Removable constraints in preference order: ties between equally
    // cheap explanations break toward the pair declared latest, i.e. the
    // least entrenched information (requests layered over base facts).
    std::vector<int> removable;
    for (int hi : spec.hard_ids) {
      if (!compiled.hard[hi].mandatory) removable.push_back(hi);
    }
    std::sort(removable.begin(), removable.end(), [&](int a, int b) {
      return std::make_pair(compiled.hard[a].target,
                            compiled.hard[a].reference) >
             std::make_pair(compiled.hard[b].target,
                            compiled.hard[b].reference);
    });

    bool solved = false;
    for (size_t s = 0; s <= removable.size() && !solved; ++s) {
      std::optional<ComponentResult> best;
      std::vector<int> best_comb;
      std::vector<int> comb(s);
      std::function<void(size_t, size_t)> walk = [&](size_t start,
                                                     size_t depth) {
        if (best && best->drops == 0) return;
        if (depth == s) {
          std::vector<char> on(compiled.hard.size(), 1);
          for (int hi : comb) on[hi] = 0;
          ComponentResult r =
              solve_component(compiled, spec, on, budget, cfg.workers);
          ex.stats.nodes += r.nodes;
          ex.stats.cell_checks += r.cell_checks;
          if (r.cut_seen) ex.budget_exhausted = true;
          if (r.status == 1 && (!best || r.drops < best->drops)) {
            best = std::move(r);
            best_comb = comb;
          }
          return;
        }
        for (size_t i = start; i < removable.size(); ++i) {
          comb[depth] = removable[i];
          walk(i + 1, depth + 1);
        }
      };
      walk(0, 0);
      if (best) {
        solved = true;
        total_violated += static_cast<int>(s);
        total_drops += best->drops;
        for (int hi : best_comb) {
          violated.push_back(
              {compiled.hard[hi].target, compiled.hard[hi].reference});
        }
        for (int di : best->dropped_default_ids) {
          sol.dropped_defaults.push_back({compiled.defaults[di].target,
                                          compiled.defaults[di].reference,
                                          false});
        }
        kept.push_back(std::move(*best));
        extract_witness(compiled, spec, kept.back(), sol);
        rptrs.push_back(&kept.back());
        sptrs.push_back(&spec);
      }
    }
    if (!solved) {
      ex.no_explanation = true;
      ex.stats.wall_s =
          std::chrono::duration<double>(Clock::now() - t0).count();
      return ex;
    }
  }

  std::sort(violated.begin(), violated.end());
  std::sort(sol.dropped_defaults.begin(), sol.dropped_defaults.end());
  sol.violated = violated;
  sol.cost = {total_violated, total_drops};
  verify_solution(compiled, rptrs, sptrs, sol);

  ex.violated = std::move(violated);
  ex.cost = sol.cost;
  ex.witness = std::move(sol);
  ex.stats.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return ex;
}

InferResult infer(const Network& net, const SolverConfig& cfg) {
  auto t0 = Clock::now();
  GridSpec grid = grid_for(net);
  Compiled base = compile(net, grid);
  Budget budget = make_budget(cfg);

  InferResult out;
  out.grid_complete = grid.complete_for(net.objects.size());

  SolveOutcome base_run = run_check(base, budget, cfg.workers);
  out.stats.nodes += base_run.nodes;
  out.stats.cell_checks += base_run.cell_checks;
  out.outcome = base_run.outcome;
  if (base_run.outcome == Outcome::Inconsistent && !out.grid_complete) {
    out.outcome = Outcome::NotFoundAtGrid;
  }
  out.budget_exhausted = base_run.budget_exhausted;
  if (base_run.outcome != Outcome::Consistent) {
    out.stats.wall_s =
        std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
  }
  out.witness = std::move(base_run.solution);
  const int base_drops = out.witness->cost.second;

  // A relation is realizable for the pair exactly when the network plus
  // the corresponding virtual constraint stays consistent at the same
  // optimal drop count.
  auto probe = [&](int u, int v, BasicRelation tiles, bool c1_only,
                   bool* cut) {
    Compiled probe_net = base;
    probe_net.extras.push_back({u, v, tiles, c1_only});
    SolveOutcome r = run_check(probe_net, budget, cfg.workers);
    out.stats.nodes += r.nodes;
    out.stats.cell_checks += r.cell_checks;
    if (r.outcome == Outcome::Unknown || r.budget_exhausted) *cut = true;
    return r.outcome == Outcome::Consistent &&
           r.solution.cost.second == base_drops;
  };

  for (const auto& [tname, rname] : net.infer_requests) {
    InferredPair ip;
    ip.target = net.index_of(tname);
    ip.reference = net.index_of(rname);

    const Constraint* existing = nullptr;
    const Constraint* fallback = nullptr;
    for (const auto& k : net.constraints) {
      if (k.target != tname || k.reference != rname) continue;
      if (k.relation.kind == RelationKind::Default) fallback = &k;
      else existing = &k;
    }
    bool default_applied = fallback != nullptr;
    if (fallback) {
      for (const auto& d : out.witness->dropped_defaults) {
        if (d.target == ip.target && d.reference == ip.reference) {
          default_applied = false;
        }
      }
    }

    if (existing) {
      ip.known = true;
      ip.relations = existing->relation.disjuncts;
    } else if (default_applied) {
      ip.known = true;
      ip.relations = fallback->relation.disjuncts;
    } else if (!cfg.enumerate_infer) {
      ip.relations.push_back(
          relation_of(out.witness->assignment[ip.target],
                      out.witness->assignment[ip.reference]));
    } else {
      bool cut = false;
      uint32_t t_glob = 0;
      for (int t = 0; t < SingleTile::kCount && !cut; ++t) {
        if (probe(ip.target, ip.reference, BasicRelation(1u << t), true,
                  &cut)) {
          t_glob |= 1u << t;
        }
      }
      std::vector<int> bits;
      for (int t = 0; t < SingleTile::kCount; ++t) {
        if (t_glob >> t & 1u) bits.push_back(t);
      }
      if (bits.size() > 20) {
        // 2^|alphabet| probes is past any reasonable budget: report the
        // witness relation and flag the enumeration as partial
        cut = true;
        bits.clear();
        ip.relations.push_back(
            relation_of(out.witness->assignment[ip.target],
                        out.witness->assignment[ip.reference]));
      }
      std::vector<uint32_t> candidates;
      for (uint32_t m = 1; m < (1u << bits.size()); ++m) {
        uint32_t tiles = 0;
        for (size_t i = 0; i < bits.size(); ++i) {
          if (m >> i & 1u) tiles |= 1u << bits[i];
        }
        candidates.push_back(tiles);
      }
      std::sort(candidates.begin(), candidates.end(),
                [](uint32_t a, uint32_t b) {
                  int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
                  return pa != pb ? pa < pb : a < b;
                });
      for (uint32_t tiles : candidates) {
        if (cut) break;
        if (probe(ip.target, ip.reference, BasicRelation(tiles), false,
                  &cut)) {
          ip.relations.push_back(BasicRelation(tiles));
        }
      }
      if (cut) out.budget_exhausted = true;
      std::sort(ip.relations.begin(), ip.relations.end());
    }
    out.pairs.push_back(std::move(ip));
  }

  out.stats.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

Network replicate_network(const Network& net, int copies) {
  Network out;
  out.connected_mode = net.connected_mode;
  for (int k = 1; k <= copies; ++k) {
    auto rename = [&](const std::string& name) {
      return k == 1 ? name : name + "__" + std::to_string(k);
    };
    for (const auto& o : net.objects) out.objects.push_back(rename(o));
    for (const auto& c : net.constraints) {
      Constraint cc = c;
      cc.target = rename(c.target);
      cc.reference = rename(c.reference);
      out.constraints.push_back(std::move(cc));
    }
    for (const auto& a : net.ab_marks) out.ab_marks.insert(rename(a));
    for (const auto& [t, r] : net.infer_requests) {
      out.infer_requests.insert({rename(t), rename(r)});
    }
  }
  return out;
}

}  // namespace ncdc
