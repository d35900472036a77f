#include "ncdc3d/asp_emit.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

namespace ncdc {

namespace {

// alltiles listing order: middle level first, then below, then above.
constexpr const char* kAllTiles[27] = {
    "swm", "sm", "sem", "wm", "om", "em", "nwm", "nm", "nem",
    "swb", "sb", "seb", "wb", "ob", "eb", "nwb", "nb", "neb",
    "swa", "sa", "sea", "wa", "oa", "ea", "nwa", "na", "nea"};

struct AxisVocab {
  const char* inf_pred;
  const char* sup_pred;
  const char* inf_var;
  const char* sup_var;
  const char* coord;
};

constexpr AxisVocab kAxis[3] = {
    {"infx", "supx", "Xi", "Xs", "X"},
    {"infy", "supy", "Yi", "Ys", "Y"},
    {"infz", "supz", "Zi", "Zs", "Z"},
};

// Endpoint atoms and cell conditions selecting one tile of V's box.
void tile_guard(SingleTile t, std::vector<std::string>& atoms,
                std::vector<std::string>& conds) {
  for (int a = 0; a < 3; ++a) {
    const AxisVocab& vv = kAxis[a];
    switch (t.axis_third(a)) {
      case Third::Lo:
        atoms.push_back(std::string(vv.inf_pred) + "(V," + vv.inf_var + ")");
        conds.push_back(std::string(vv.coord) + " < " + vv.inf_var);
        break;
      case Third::Mid:
        atoms.push_back(std::string(vv.inf_pred) + "(V," + vv.inf_var + ")");
        atoms.push_back(std::string(vv.sup_pred) + "(V," + vv.sup_var + ")");
        conds.push_back(std::string(vv.inf_var) + " <= " + vv.coord);
        conds.push_back(std::string(vv.coord) + " <= " + vv.sup_var);
        break;
      case Third::Hi:
        atoms.push_back(std::string(vv.sup_pred) + "(V," + vv.sup_var + ")");
        conds.push_back(std::string(vv.coord) + " > " + vv.sup_var);
        break;
    }
  }
}

std::string join(const std::vector<std::string>& parts,
                 const std::string& sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

// One C1-violation and one C2-violation rule per tile.
void emit_violation_families(std::ostream& os, const std::string& rel_pred,
                             const std::string& exist_pred,
                             const std::string& viol_pred) {
  for (int ti = 0; ti < SingleTile::kCount; ++ti) {
    SingleTile t = SingleTile::from_index(ti);
    std::vector<std::string> atoms, conds;
    tile_guard(t, atoms, conds);
    std::string tok = t.lower_token();
    os << viol_pred << "(U,V) :- " << rel_pred << "(U,V," << tok << "), "
       << join(atoms, ", ") << ", #count { X,Y,Z : occ(U,X,Y,Z), "
       << join(conds, ", ") << " } <= 0.\n";
    os << viol_pred << "(U,V) :- " << exist_pred << "(U,V), not " << rel_pred
       << "(U,V," << tok << "), " << join(atoms, ", ")
       << ", #count { X,Y,Z : occ(U,X,Y,Z), " << join(conds, ", ")
       << " } >= 1.\n";
  }
}

}  // namespace

int ObjectNumbering::id_of(std::string_view name) const {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i) + 1;
  }
  return -1;
}

std::string emit_facts(const Network& net) {
  require_valid(net);
  ObjectNumbering num(net);
  std::ostringstream os;

  os << "% object ids (declaration order)\n";
  for (size_t i = 0; i < net.objects.size(); ++i) {
    os << "% " << (i + 1) << " = " << net.objects[i] << "\n";
  }
  if (net.objects.size() == 1) {
    os << "object(1).\n";
  } else {
    os << "object(1.." << net.objects.size() << ").\n";
  }
  os << "\n";
  for (const char* t : kAllTiles) os << "alltiles(" << t << ").\n";
  os << "\n";

  for (const auto& c : net.constraints) {
    int u = num.id_of(c.target), v = num.id_of(c.reference);
    switch (c.relation.kind) {
      case RelationKind::Basic:
        for (auto t : c.relation.disjuncts[0].tiles()) {
          os << "relation(" << u << "," << v << "," << t.lower_token()
             << ").\n";
        }
        break;
      case RelationKind::Disjunctive:
        for (size_t d = 0; d < c.relation.disjuncts.size(); ++d) {
          for (auto t : c.relation.disjuncts[d].tiles()) {
            os << "disjrelation(" << u << "," << v << "," << (d + 1) << ","
               << t.lower_token() << ").\n";
          }
        }
        break;
      case RelationKind::Default:
        for (auto t : c.relation.disjuncts[0].tiles()) {
          os << "defaultrelation(" << u << "," << v << "," << t.lower_token()
             << ").\n";
        }
        break;
    }
  }
  for (const auto& c : net.constraints) {
    if (c.mandatory) {
      os << "mandatory(" << num.id_of(c.target) << ","
         << num.id_of(c.reference) << ").\n";
    }
  }
  for (const auto& name : net.ab_marks) {
    os << "ab(" << num.id_of(name) << ").\n";
  }
  for (const auto& [t, r] : net.infer_requests) {
    os << "toinfer(" << num.id_of(t) << "," << num.id_of(r) << ").\n";
  }
  return os.str();
}

std::string emit_program(const Network& net, const GridSpec& grid,
                         AspMode mode) {
  require_valid(net);
  ObjectNumbering num(net);
  std::ostringstream os;

  bool has_disj = false, has_default = false, has_mandatory = false;
  for (const auto& c : net.constraints) {
    has_disj |= c.relation.kind == RelationKind::Disjunctive;
    has_default |= c.relation.kind == RelationKind::Default;
    has_mandatory |= c.mandatory;
  }

  os << "% grid " << grid.m << "x" << grid.n << "x" << grid.p << "\n";
  os << "xcoord(1.." << grid.m << ").\n";
  os << "ycoord(1.." << grid.n << ").\n";
  os << "zcoord(1.." << grid.p << ").\n\n";

  os << "% candidate bounding box per object\n";
  for (int a = 0; a < 3; ++a) {
    const AxisVocab& vv = kAxis[a];
    const char* coord = a == 0 ? "xcoord" : a == 1 ? "ycoord" : "zcoord";
    os << "1 { " << vv.inf_pred << "(U," << vv.coord << ") : " << coord << "("
       << vv.coord << ") } 1 :- object(U).\n";
    os << "1 { " << vv.sup_pred << "(U," << vv.coord << ") : " << coord << "("
       << vv.coord << ") } 1 :- object(U).\n";
    os << ":- " << vv.inf_pred << "(U," << vv.inf_var << "), " << vv.sup_pred
       << "(U," << vv.sup_var << "), " << vv.inf_var << " > " << vv.sup_var
       << ".\n";
  }
  os << "\n% cell assignment and projections\n";
  os << "1 { occ(U,X,Y,Z) : xcoord(X), ycoord(Y), zcoord(Z) } :- "
        "object(U).\n";
  os << "xocc(U,X) :- occ(U,X,Y,Z).\n";
  os << "yocc(U,Y) :- occ(U,X,Y,Z).\n";
  os << "zocc(U,Z) :- occ(U,X,Y,Z).\n";
  for (int a = 0; a < 3; ++a) {
    const AxisVocab& vv = kAxis[a];
    const char* proj = a == 0 ? "xocc" : a == 1 ? "yocc" : "zocc";
    os << ":- " << proj << "(U," << vv.coord << "), " << vv.inf_pred << "(U,"
       << vv.inf_var << "), " << vv.coord << " < " << vv.inf_var << ".\n";
    os << ":- " << proj << "(U," << vv.coord << "), " << vv.sup_pred << "(U,"
       << vv.sup_var << "), " << vv.coord << " > " << vv.sup_var << ".\n";
    os << ":- " << vv.inf_pred << "(U," << vv.inf_var << "), not " << proj
       << "(U," << vv.inf_var << "), object(U).\n";
    os << ":- " << vv.sup_pred << "(U," << vv.sup_var << "), not " << proj
       << "(U," << vv.sup_var << "), object(U).\n";
  }

  if (has_disj) {
    os << "\n% disjunctive constraints: choose exactly one disjunct\n";
    os << "hasdisj(U,V,D) :- disjrelation(U,V,D,R).\n";
    os << "existdisj(U,V) :- hasdisj(U,V,D).\n";
    os << "1 { chosen(U,V,D) : hasdisj(U,V,D) } 1 :- existdisj(U,V).\n";
    os << "relation(U,V,R) :- chosen(U,V,D), disjrelation(U,V,D,R).\n";
  }

  os << "\n% violation of C1/C2 per tile\n";
  os << "existrel(U,V) :- relation(U,V,R), alltiles(R).\n";
  emit_violation_families(os, "relation", "existrel", "violated");

  if (has_default) {
    os << "\n% default constraints apply unless there is evidence against\n";
    os << "existdefrel(U,V) :- defaultrelation(U,V,R), alltiles(R).\n";
    os << "drel(U,V) :- not -drel(U,V), existdefrel(U,V).\n";
    emit_violation_families(os, "defaultrelation", "existdefrel",
                            "violateddef");
    os << "-drel(U,V) :- violateddef(U,V), existdefrel(U,V).\n";
    if (!net.ab_marks.empty()) {
      os << "-drel(U,V) :- ab(V), existdefrel(U,V).\n";
      os << "-drel(U,V) :- ab(U), existdefrel(U,V).\n";
    }
    os << ":~ -drel(U,V), existdefrel(U,V). [1@1,U,V]\n";
  }

  switch (mode) {
    case AspMode::Check:
    case AspMode::Infer:
      os << "\n:- violated(U,V), existrel(U,V).\n";
      break;
    case AspMode::Explain:
      if (has_mandatory) {
        os << "\n:- violated(U,V), mandatory(U,V), existrel(U,V).\n";
        os << ":~ violated(U,V), not mandatory(U,V), existrel(U,V). "
              "[1@2,U,V]\n";
      } else {
        os << "\n:~ violated(U,V), existrel(U,V). [1@2,U,V]\n";
      }
      break;
  }

  if (mode == AspMode::Infer) {
    os << "\n% generate a relation for each requested unknown pair\n";
    os << "known(U,V) :- existrel(U,V).\n";
    if (has_default) os << "known(U,V) :- drel(U,V).\n";
    os << "1 { infer(U,V,R) : alltiles(R) } :- toinfer(U,V), not "
          "known(U,V).\n";
    os << "existinfer(U,V) :- infer(U,V,R).\n";
    emit_violation_families(os, "infer", "existinfer", "inferviolated");
    os << ":- inferviolated(U,V), existinfer(U,V).\n";
  }

  if (net.connected_mode) {
    os << "\n% connectedness of target objects from the stem cell\n";
    std::set<int> targets;
    for (const auto& c : net.constraints) targets.insert(num.id_of(c.target));
    for (int t : targets) os << "target(" << t << ").\n";
    os << "leftside(U,Y,Z) :- infx(U,Xi), occ(U,Xi,Y,Z), target(U).\n";
    os << "leftborder(U,Y) :- infx(U,Xi), occ(U,Xi,Y,Z), target(U).\n";
    os << "ymin(U,Ym) :- Ym = #min { Y : leftborder(U,Y) }, target(U), "
          "object(U).\n";
    os << "zborder(U,Z) :- leftside(U,Ym,Z), ymin(U,Ym).\n";
    os << "zmin(U,Zm) :- Zm = #min { Z : zborder(U,Z) }, target(U), "
          "object(U).\n";
    os << "stem(U,Xi,Ym,Zm) :- infx(U,Xi), ymin(U,Ym), zmin(U,Zm), "
          "target(U).\n";
    os << "connset(U,X,Y,Z) :- stem(U,X,Y,Z).\n";
    for (int a = 0; a < 3; ++a) {
      const char* v = kAxis[a].coord;
      for (const char* sign : {"+", "-"}) {
        std::string head = "connset(U";
        std::string occ = "occ(U";
        for (int b = 0; b < 3; ++b) {
          std::string arg = kAxis[b].coord;
          if (b == a) arg += std::string(sign) + "1";
          head += "," + arg;
          occ += "," + arg;
        }
        os << head << ") :- connset(U,X,Y,Z), " << occ << ").\n";
        (void)v;
      }
    }
    os << ":- occ(U,X,Y,Z), not connset(U,X,Y,Z), target(U).\n";
  }

  os << "\n#show occ/4.\n";
  if (mode == AspMode::Explain) os << "#show violated/2.\n";
  if (has_default) os << "#show drel/2.\n";
  if (has_disj) os << "#show chosen/3.\n";
  if (mode == AspMode::Infer) os << "#show infer/3.\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Answer-set decoding.
// ---------------------------------------------------------------------------

namespace {

struct Atom {
  std::string name;  // with any leading '-'
  std::vector<int> args;
};

std::optional<Atom> parse_atom(std::string_view tok, std::string* err) {
  while (!tok.empty() && (tok.back() == '.' || tok.back() == ',')) {
    tok.remove_suffix(1);
  }
  if (tok.empty()) return std::nullopt;
  size_t open = tok.find('(');
  if (open == std::string_view::npos) {
    return Atom{std::string(tok), {}};
  }
  if (tok.back() != ')') {
    *err = "malformed atom '" + std::string(tok) + "'";
    return std::nullopt;
  }
  Atom a;
  a.name = std::string(tok.substr(0, open));
  std::string_view args = tok.substr(open + 1, tok.size() - open - 2);
  size_t start = 0;
  while (start <= args.size() && !args.empty()) {
    size_t comma = args.find(',', start);
    std::string_view piece = args.substr(
        start, comma == std::string_view::npos ? args.size() - start
                                               : comma - start);
    int v = 0;
    auto [p, ec] = std::from_chars(piece.data(), piece.data() + piece.size(),
                                   v);
    if (ec != std::errc() || p != piece.data() + piece.size()) {
      *err = "malformed atom '" + std::string(tok) + "'";
      return std::nullopt;
    }
    a.args.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return a;
}

}  // namespace

Solution decode_answer_set(std::string_view text, const Network& net,
                           const GridSpec& grid) {
  require_valid(net);
  int n = static_cast<int>(net.objects.size());

  Solution sol;
  sol.grid = grid;
  sol.assignment.assign(n, SpatialObject{});
  std::set<std::pair<int, int>> drel, neg_drel, violated;

  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(uint8_t(text[i]))) ++i;
    size_t j = i;
    int depth = 0;
    while (j < text.size() && (depth > 0 || !std::isspace(uint8_t(text[j])))) {
      if (text[j] == '(') ++depth;
      if (text[j] == ')') --depth;
      ++j;
    }
    if (j == i) break;
    std::string_view tok = text.substr(i, j - i);
    i = j;

    std::string err;
    auto atom = parse_atom(tok, &err);
    if (!atom) {
      if (!err.empty()) throw DecodeError{err};
      continue;
    }
    auto need_args = [&](size_t k) {
      if (atom->args.size() != k) {
        throw DecodeError{"atom '" + atom->name + "' expects " +
                          std::to_string(k) + " arguments"};
      }
    };
    if (atom->name == "occ") {
      need_args(4);
      int u = atom->args[0], x = atom->args[1], y = atom->args[2],
          z = atom->args[3];
      if (u < 1 || u > n) {
        throw DecodeError{"occ names unknown object id " + std::to_string(u)};
      }
      if (x < 1 || x > grid.m || y < 1 || y > grid.n || z < 1 || z > grid.p) {
        throw DecodeError{"occ cell outside the grid"};
      }
      sol.assignment[u - 1].cells.push_back(
          {int16_t(x), int16_t(y), int16_t(z)});
    } else if (atom->name == "drel") {
      need_args(2);
      drel.insert({atom->args[0], atom->args[1]});
    } else if (atom->name == "-drel") {
      need_args(2);
      neg_drel.insert({atom->args[0], atom->args[1]});
    } else if (atom->name == "violated") {
      need_args(2);
      violated.insert({atom->args[0], atom->args[1]});
    }
    // other atoms are ignored
  }

  for (int u = 0; u < n; ++u) {
    if (sol.assignment[u].cells.empty()) {
      throw DecodeError{"no occ atoms for object '" + net.objects[u] + "' (" +
                        std::to_string(u + 1) + ")"};
    }
    auto& cells = sol.assignment[u].cells;
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  }

  for (const auto& c : net.constraints) {
    if (c.relation.kind != RelationKind::Default) continue;
    int u = net.index_of(c.target) + 1, v = net.index_of(c.reference) + 1;
    bool applied = drel.count({u, v}) && !neg_drel.count({u, v});
    if (!applied) {
      bool ab = net.ab_marks.count(c.target) || net.ab_marks.count(c.reference);
      sol.dropped_defaults.push_back({u - 1, v - 1, ab});
    }
  }
  std::sort(sol.dropped_defaults.begin(), sol.dropped_defaults.end());

  for (const auto& [u, v] : violated) {
    if (u >= 1 && u <= n && v >= 1 && v <= n) {
      sol.violated.push_back({u - 1, v - 1});
    }
  }
  std::sort(sol.violated.begin(), sol.violated.end());

  int drops = 0;
  for (const auto& d : sol.dropped_defaults) {
    if (!d.ab_forced) ++drops;
  }
  sol.cost = {static_cast<int>(sol.violated.size()), drops};
  return sol;
}

// ---------------------------------------------------------------------------
// Lightweight grammar check for the emitted dialect.
// ---------------------------------------------------------------------------

std::string validate_asp_syntax(std::string_view program) {
  // strip % comments
  std::string text;
  text.reserve(program.size());
  size_t i = 0;
  while (i < program.size()) {
    if (program[i] == '%') {
      while (i < program.size() && program[i] != '\n') ++i;
    } else {
      text.push_back(program[i++]);
    }
  }

  auto statement_error = [](const std::string& stmt, const std::string& why) {
    return "bad statement '" + stmt.substr(0, 60) + "': " + why;
  };

  size_t pos = 0;
  int line = 1;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(uint8_t(text[pos]))) {
      if (text[pos] == '\n') ++line;
      ++pos;
    }
    if (pos >= text.size()) break;

    // scan one statement: up to a '.' at delimiter depth 0 that is not
    // part of a '..' range, plus an optional trailing [weights]
    size_t start = pos;
    int paren = 0, brace = 0, bracket = 0;
    bool found_dot = false;
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '(') ++paren;
      else if (c == ')') --paren;
      else if (c == '{') ++brace;
      else if (c == '}') --brace;
      else if (c == '[') ++bracket;
      else if (c == ']') --bracket;
      else if (c == '.' && paren == 0 && brace == 0 && bracket == 0) {
        if (pos + 1 < text.size() && text[pos + 1] == '.') {
          pos += 2;  // range token
          continue;
        }
        found_dot = true;
        ++pos;
        break;
      }
      if (paren < 0 || brace < 0 || bracket < 0) {
        return "unbalanced delimiter near line " + std::to_string(line);
      }
      ++pos;
    }
    std::string stmt = text.substr(start, pos - start);
    if (!found_dot) return statement_error(stmt, "missing terminating '.'");
    if (paren != 0 || brace != 0 || bracket != 0) {
      return statement_error(stmt, "unbalanced delimiters");
    }

    // weak constraints carry a weight term after the period
    bool weak = stmt.rfind(":~", 0) == 0 ||
                stmt.find(" :~") != std::string::npos;
    {
      size_t save = pos;
      while (pos < text.size() && std::isspace(uint8_t(text[pos])) &&
             text[pos] != '\n') {
        ++pos;
      }
      if (pos < text.size() && text[pos] == '[') {
        size_t close = text.find(']', pos);
        if (close == std::string::npos) {
          return statement_error(stmt, "unterminated weight term");
        }
        std::string w = text.substr(pos, close - pos + 1);
        if (!weak) return statement_error(stmt, "weight on non-weak rule");
        if (w.find('@') == std::string::npos) {
          return statement_error(stmt, "weight term lacks a priority");
        }
        pos = close + 1;
      } else {
        if (weak) return statement_error(stmt, "weak constraint lacks [w@p]");
        pos = save;
      }
    }

    // token sanity: only the characters our dialect uses
    for (char c : stmt) {
      if (std::isalnum(uint8_t(c)) || std::isspace(uint8_t(c))) continue;
      if (std::strchr("_(){}[],:;.~#<>=+-/@", c) != nullptr) continue;
      return statement_error(stmt, std::string("unexpected character '") +
                                       c + "'");
    }
    // directives we emit
    if (stmt[0] == '#' && stmt.rfind("#show", 0) != 0) {
      return statement_error(stmt, "unknown directive");
    }
    size_t arrow = stmt.find(":-");
    if (arrow != std::string::npos &&
        stmt.find(":-", arrow + 2) != std::string::npos) {
      return statement_error(stmt, "multiple ':-' in one rule");
    }
  }
  return "";
}

}  // namespace ncdc
