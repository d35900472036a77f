#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ncdc {

// ---------------------------------------------------------------------------
// Direction tiles.
//
// A reference box splits space into 27 tiles: 9 compass positions times
// 3 vertical bands. Planar follows the reading order of the 3x3 grid
// (north = +y, east = +x); Level M is flush with the box, A above, B below.
// ---------------------------------------------------------------------------

enum class Planar : uint8_t { NW, N, NE, W, O, E, SW, S, SE };
enum class Level : uint8_t { M, A, B };

// Band of a coordinate relative to a closed interval [inf, sup]:
// Lo is strictly below inf, Mid inside, Hi strictly above sup.
enum class Third : uint8_t { Lo, Mid, Hi };

class SingleTile {
 public:
  static constexpr int kCount = 27;

  constexpr SingleTile() = default;
  constexpr SingleTile(Planar p, Level l)
      : idx_(static_cast<uint8_t>(p) * 3 + static_cast<uint8_t>(l)) {}
  static constexpr SingleTile from_index(int i) {
    return SingleTile(Planar(i / 3), Level(i % 3));
  }

  constexpr int index() const { return idx_; }
  constexpr Planar planar() const { return Planar(idx_ / 3); }
  constexpr Level level() const { return Level(idx_ % 3); }

  Third x_third() const;
  Third y_third() const;
  Third z_third() const;
  Third axis_third(int axis) const;  // 0=x, 1=y, 2=z

  std::string token() const;        // canonical, e.g. "SWB", "OM"
  std::string lower_token() const;  // emitter form, e.g. "swb", "om"

  // Case-insensitive; accepts "swb", "SWB", "SwB".
  static std::optional<SingleTile> parse(std::string_view tok);

  auto operator<=>(const SingleTile&) const = default;

 private:
  uint8_t idx_ = 0;
};

// Non-empty set of tiles; the relation R1:...:Rk.
struct BasicRelation {
  uint32_t bits = 0;

  BasicRelation() = default;
  explicit BasicRelation(uint32_t b) : bits(b) {}
  BasicRelation(std::initializer_list<SingleTile> ts) {
    for (auto t : ts) add(t);
  }

  void add(SingleTile t) { bits |= (1u << t.index()); }
  bool contains(SingleTile t) const { return bits >> t.index() & 1u; }
  int size() const { return __builtin_popcount(bits); }
  bool empty() const { return bits == 0; }

  std::vector<SingleTile> tiles() const;  // ascending canonical order
  std::string token() const;              // "SWB:SEB"

  // Union of per-tile thirds on one axis, as a bitmask
  // (1 << int(Third)). Never 0 for a non-empty relation.
  uint8_t thirds_mask(int axis) const;

  auto operator<=>(const BasicRelation&) const = default;
};

enum class RelationKind : uint8_t { Basic, Disjunctive, Default };

struct Relation {
  RelationKind kind = RelationKind::Basic;
  // Basic/Default hold exactly one entry; Disjunctive at least two.
  std::vector<BasicRelation> disjuncts;

  static Relation basic(BasicRelation r) {
    return Relation{RelationKind::Basic, {r}};
  }
  static Relation disjunctive(std::vector<BasicRelation> ds) {
    return Relation{RelationKind::Disjunctive, std::move(ds)};
  }
  static Relation fallback(BasicRelation r) {  // a default constraint
    return Relation{RelationKind::Default, {r}};
  }

  bool operator==(const Relation&) const = default;
};

struct Constraint {
  std::string target;
  std::string reference;
  Relation relation;
  bool mandatory = false;

  bool operator==(const Constraint&) const = default;
};

struct GridSpec {
  int m = 1, n = 1, p = 1;

  int axis(int a) const { return a == 0 ? m : a == 1 ? n : p; }
  long long cell_count() const { return 1LL * m * n * p; }
  // A grid decides the continuous problem exactly when every side
  // reaches 2|V|-1.
  bool complete_for(size_t n_objects) const {
    int bound = 2 * static_cast<int>(n_objects) - 1;
    return m >= bound && n >= bound && p >= bound;
  }
  bool operator==(const GridSpec&) const = default;
};

struct Network {
  std::vector<std::string> objects;  // declaration order, distinct
  std::vector<Constraint> constraints;
  std::set<std::string> ab_marks;
  std::set<std::pair<std::string, std::string>> infer_requests;
  bool connected_mode = false;
  std::optional<GridSpec> grid_override;

  int index_of(std::string_view name) const;  // -1 when absent

  bool operator==(const Network&) const = default;
};

// ---------------------------------------------------------------------------
// Grid-level values.
// ---------------------------------------------------------------------------

struct Cell {
  int16_t x = 0, y = 0, z = 0;
  int coord(int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  auto operator<=>(const Cell&) const = default;
};

struct MBB {
  // lo[a] <= hi[a]; equals the componentwise min/max of the owning cells.
  std::array<int16_t, 3> lo{1, 1, 1};
  std::array<int16_t, 3> hi{1, 1, 1};

  auto operator<=>(const MBB&) const = default;
};

struct SpatialObject {
  std::vector<Cell> cells;  // sorted, non-empty, inside the grid
};

struct DroppedDefault {
  int target = -1, reference = -1;  // object indices
  bool ab_forced = false;
  auto operator<=>(const DroppedDefault&) const = default;
};

struct Solution {
  GridSpec grid;
  std::vector<SpatialObject> assignment;      // by object index, covers V
  std::vector<DroppedDefault> dropped_defaults;
  std::vector<std::pair<int, int>> violated;  // empty in plain check mode
  // Lexicographic cost: violations at level 2 before drops at level 1.
  std::pair<int, int> cost{0, 0};
};

// ---------------------------------------------------------------------------
// Validation.
// ---------------------------------------------------------------------------

enum class IssueCode {
  DuplicateConstraint,
  SelfConstraint,
  UnknownName,
  DuplicateDisjunct,
  EmptyRelation,
  DuplicateName,
};

struct ValidationIssue {
  IssueCode code;
  std::string subject;  // offending name or "target,reference" pair
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string str() const;
};

// Checks every network invariant and reports all violations at once.
ValidationReport validate_network(const Network& net);

// Thrown by callers that need a valid network and got issues instead.
struct ValidationError {
  ValidationReport report;
};

// Returns the network unchanged or throws ValidationError.
const Network& require_valid(const Network& net);

}  // namespace ncdc
