#include "ncdc3d/model.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ncdc {

namespace {

constexpr const char* kPlanarNames[9] = {"NW", "N", "NE", "W", "O",
                                         "E",  "SW", "S", "SE"};
constexpr char kLevelNames[3] = {'M', 'A', 'B'};

Third x_third_of(Planar p) {
  switch (p) {
    case Planar::NW: case Planar::W: case Planar::SW: return Third::Lo;
    case Planar::N:  case Planar::O: case Planar::S:  return Third::Mid;
    default: return Third::Hi;  // NE, E, SE
  }
}

Third y_third_of(Planar p) {
  switch (p) {
    case Planar::SW: case Planar::S: case Planar::SE: return Third::Lo;
    case Planar::W:  case Planar::O: case Planar::E:  return Third::Mid;
    default: return Third::Hi;  // NW, N, NE
  }
}

Third z_third_of(Level l) {
  switch (l) {
    case Level::B: return Third::Lo;
    case Level::M: return Third::Mid;
    default: return Third::Hi;
  }
}

}  // namespace

Third SingleTile::x_third() const { return x_third_of(planar()); }
Third SingleTile::y_third() const { return y_third_of(planar()); }
Third SingleTile::z_third() const { return z_third_of(level()); }

Third SingleTile::axis_third(int axis) const {
  return axis == 0 ? x_third() : axis == 1 ? y_third() : z_third();
}

std::string SingleTile::token() const {
  std::string s = kPlanarNames[static_cast<int>(planar())];
  s.push_back(kLevelNames[static_cast<int>(level())]);
  return s;
}

std::string SingleTile::lower_token() const {
  std::string s = token();
  for (char& c : s) c = static_cast<char>(std::tolower(c));
  return s;
}

std::optional<SingleTile> SingleTile::parse(std::string_view tok) {
  if (tok.size() < 2 || tok.size() > 3) return std::nullopt;
  std::string up(tok);
  for (char& c : up) c = static_cast<char>(std::toupper(c));

  Level lvl;
  switch (up.back()) {
    case 'M': lvl = Level::M; break;
    case 'A': lvl = Level::A; break;
    case 'B': lvl = Level::B; break;
    default: return std::nullopt;
  }
  std::string_view pl(up.data(), up.size() - 1);
  for (int i = 0; i < 9; ++i) {
    if (pl == kPlanarNames[i]) return SingleTile(Planar(i), lvl);
  }
  return std::nullopt;
}

std::vector<SingleTile> BasicRelation::tiles() const {
  std::vector<SingleTile> out;
  for (int i = 0; i < SingleTile::kCount; ++i) {
    if (bits >> i & 1u) out.push_back(SingleTile::from_index(i));
  }
  return out;
}

std::string BasicRelation::token() const {
  std::string s;
  for (auto t : tiles()) {
    if (!s.empty()) s.push_back(':');
    s += t.token();
  }
  return s;
}

uint8_t BasicRelation::thirds_mask(int axis) const {
  uint8_t mask = 0;
  for (int i = 0; i < SingleTile::kCount; ++i) {
    if (bits >> i & 1u) {
      mask |= uint8_t(1u << int(SingleTile::from_index(i).axis_third(axis)));
    }
  }
  return mask;
}

int Network::index_of(std::string_view name) const {
  for (size_t i = 0; i < objects.size(); ++i) {
    if (objects[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::string ValidationReport::str() const {
  std::ostringstream os;
  for (const auto& i : issues) os << i.message << '\n';
  return os.str();
}

ValidationReport validate_network(const Network& net) {
  ValidationReport rep;
  auto issue = [&](IssueCode code, std::string subject, std::string msg) {
    rep.issues.push_back({code, std::move(subject), std::move(msg)});
  };

  std::set<std::string> seen;
  for (const auto& name : net.objects) {
    if (!seen.insert(name).second) {
      issue(IssueCode::DuplicateName, name,
            "object '" + name + "' declared more than once");
    }
  }
  auto known = [&](const std::string& name) { return seen.count(name) != 0; };

  std::set<std::pair<std::string, std::string>> hard_pairs, default_pairs;
  for (const auto& c : net.constraints) {
    std::string pair = c.target + "," + c.reference;
    if (c.target == c.reference) {
      issue(IssueCode::SelfConstraint, c.target,
            "constraint relates '" + c.target + "' to itself");
    }
    for (const auto& name : {c.target, c.reference}) {
      if (!known(name)) {
        issue(IssueCode::UnknownName, name,
              "constraint uses undeclared object '" + name + "'");
      }
    }
    auto& bucket =
        c.relation.kind == RelationKind::Default ? default_pairs : hard_pairs;
    if (!bucket.insert({c.target, c.reference}).second) {
      issue(IssueCode::DuplicateConstraint, pair,
            "pair (" + pair + ") carries more than one " +
                (c.relation.kind == RelationKind::Default ? "default"
                                                          : "non-default") +
                " constraint");
    }
    for (const auto& d : c.relation.disjuncts) {
      if (d.empty()) {
        issue(IssueCode::EmptyRelation, pair,
              "constraint on (" + pair + ") has an empty relation");
      }
    }
    if (c.relation.disjuncts.empty()) {
      issue(IssueCode::EmptyRelation, pair,
            "constraint on (" + pair + ") has no relation");
    }
    if (c.relation.kind == RelationKind::Disjunctive) {
      const auto& ds = c.relation.disjuncts;
      if (ds.size() < 2) {
        issue(IssueCode::EmptyRelation, pair,
              "disjunctive constraint on (" + pair + ") needs two disjuncts");
      }
      for (size_t i = 0; i < ds.size(); ++i) {
        for (size_t j = i + 1; j < ds.size(); ++j) {
          if (ds[i] == ds[j]) {
            issue(IssueCode::DuplicateDisjunct, pair,
                  "disjunctive constraint on (" + pair +
                      ") repeats a disjunct");
          }
        }
      }
    }
  }

  for (const auto& name : net.ab_marks) {
    if (!known(name)) {
      issue(IssueCode::UnknownName, name,
            "ab mark on undeclared object '" + name + "'");
    }
  }
  for (const auto& [t, r] : net.infer_requests) {
    if (t == r) {
      issue(IssueCode::SelfConstraint, t,
            "inference request relates '" + t + "' to itself");
    }
    for (const auto& name : {t, r}) {
      if (!known(name)) {
        issue(IssueCode::UnknownName, name,
              "inference request uses undeclared object '" + name + "'");
      }
    }
  }
  return rep;
}

const Network& require_valid(const Network& net) {
  ValidationReport rep = validate_network(net);
  if (!rep.ok()) throw ValidationError{std::move(rep)};
  return net;
}

}  // namespace ncdc
