#include "ncdc3d/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>
#include <vector>

namespace ncdc {

namespace {

struct Token {
  std::string text;
  SourceSpan span;
};

bool is_name_start(char c) { return std::isalpha(uint8_t(c)) || c == '_'; }
bool is_name_char(char c) { return std::isalnum(uint8_t(c)) || c == '_'; }

// Splits one line into whitespace-separated tokens; '|' and ':' are
// their own tokens so "NM|NB" and "NM | NB" read the same.
std::vector<Token> tokenize_line(std::string_view line, int line_no) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (std::isspace(uint8_t(c))) {
      ++i;
      continue;
    }
    SourceSpan span{line_no, static_cast<int>(i) + 1};
    if (c == '|' || c == ':') {
      out.push_back({std::string(1, c), span});
      ++i;
      continue;
    }
    size_t j = i;
    while (j < line.size() && !std::isspace(uint8_t(line[j])) &&
           line[j] != '|' && line[j] != ':' && line[j] != '#') {
      ++j;
    }
    out.push_back({std::string(line.substr(i, j - i)), span});
    i = j;
  }
  return out;
}

[[noreturn]] void fail(SourceSpan span, std::string msg) {
  throw ParseError{span, std::move(msg)};
}

class LineParser {
 public:
  LineParser(std::vector<Token> toks, int line_no)
      : toks_(std::move(toks)), line_no_(line_no) {}

  bool done() const { return pos_ >= toks_.size(); }
  SourceSpan here() const {
    if (!done()) return toks_[pos_].span;
    return {line_no_, toks_.empty() ? 1 : toks_.back().span.column +
                                              int(toks_.back().text.size())};
  }

  const Token& take(std::string_view what) {
    if (done()) fail(here(), std::string("expected ") + std::string(what));
    return toks_[pos_++];
  }

  std::string take_name(std::string_view what) {
    const Token& t = take(what);
    if (!is_name_start(t.text[0]) ||
        !std::all_of(t.text.begin(), t.text.end(), is_name_char)) {
      fail(t.span, "expected " + std::string(what) + ", got '" + t.text + "'");
    }
    return t.text;
  }

  int take_int(std::string_view what) {
    const Token& t = take(what);
    int v = 0;
    auto [ptr, ec] =
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      fail(t.span, "expected " + std::string(what) + ", got '" + t.text + "'");
    }
    return v;
  }

  bool peek_is(std::string_view s) const {
    return !done() && toks_[pos_].text == s;
  }
  void skip() { ++pos_; }

  void expect_end() {
    if (!done()) {
      fail(toks_[pos_].span,
           "unexpected trailing token '" + toks_[pos_].text + "'");
    }
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  int line_no_;
};

}  // namespace

Network parse_network(std::string_view text) {
  Network net;
  std::map<std::string, int> index;
  auto intern = [&](const std::string& name) {
    if (index.emplace(name, int(net.objects.size())).second) {
      net.objects.push_back(name);
    }
  };

  // Mandatory lines may precede the constraint they flag.
  std::vector<std::pair<std::pair<std::string, std::string>, SourceSpan>>
      mandatory_lines;
  bool saw_grid = false;

  auto parse_tiles = [&](LineParser& lp) {
    BasicRelation rel;
    const Token& first = lp.take("tile token");
    auto t0 = SingleTile::parse(first.text);
    if (!t0) fail(first.span, "unknown tile token '" + first.text + "'");
    rel.add(*t0);
    while (lp.peek_is(":")) {
      lp.skip();
      const Token& t = lp.take("tile token");
      auto tile = SingleTile::parse(t.text);
      if (!tile) fail(t.span, "unknown tile token '" + t.text + "'");
      rel.add(*tile);
    }
    return rel;
  };

  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    std::string_view raw = text.substr(
        start, end == std::string_view::npos ? text.size() - start
                                             : end - start);
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::vector<Token> toks = tokenize_line(raw, line_no);
    if (end == std::string_view::npos) start = text.size() + 1;
    else start = end + 1;
    if (toks.empty()) continue;

    LineParser lp(std::move(toks), line_no);
    const Token& head = lp.take("directive");
    const std::string& kw = head.text;

    if (kw == "objects") {
      std::string name = lp.take_name("object name");
      intern(name);
      while (!lp.done()) intern(lp.take_name("object name"));
    } else if (kw == "rel" || kw == "default") {
      std::string target = lp.take_name("target name");
      std::string reference = lp.take_name("reference name");
      BasicRelation rel = parse_tiles(lp);
      lp.expect_end();
      intern(target);
      intern(reference);
      net.constraints.push_back(
          {target, reference,
           kw == "rel" ? Relation::basic(rel) : Relation::fallback(rel),
           false});
    } else if (kw == "disj") {
      std::string target = lp.take_name("target name");
      std::string reference = lp.take_name("reference name");
      std::vector<BasicRelation> disjuncts{parse_tiles(lp)};
      SourceSpan bar_span = lp.here();
      if (!lp.peek_is("|")) fail(bar_span, "expected '|' and a second disjunct");
      while (lp.peek_is("|")) {
        lp.skip();
        disjuncts.push_back(parse_tiles(lp));
      }
      lp.expect_end();
      intern(target);
      intern(reference);
      net.constraints.push_back(
          {target, reference, Relation::disjunctive(std::move(disjuncts)),
           false});
    } else if (kw == "mandatory") {
      std::string target = lp.take_name("target name");
      std::string reference = lp.take_name("reference name");
      lp.expect_end();
      mandatory_lines.push_back({{target, reference}, head.span});
    } else if (kw == "infer") {
      std::string target = lp.take_name("target name");
      std::string reference = lp.take_name("reference name");
      lp.expect_end();
      intern(target);
      intern(reference);
      net.infer_requests.insert({target, reference});
    } else if (kw == "ab") {
      std::string name = lp.take_name("object name");
      lp.expect_end();
      intern(name);
      net.ab_marks.insert(name);
    } else if (kw == "connected") {
      lp.expect_end();
      net.connected_mode = true;
    } else if (kw == "grid") {
      if (saw_grid) fail(head.span, "duplicate grid line");
      saw_grid = true;
      GridSpec g;
      g.m = lp.take_int("grid width");
      g.n = lp.take_int("grid depth");
      g.p = lp.take_int("grid height");
      lp.expect_end();
      if (g.m < 1 || g.n < 1 || g.p < 1) {
        fail(head.span, "grid dimensions must be positive");
      }
      net.grid_override = g;
    } else {
      fail(head.span,
           "unknown directive '" + kw +
               "' (expected objects, rel, disj, default, mandatory, infer, "
               "ab, connected or grid)");
    }
  }

  for (const auto& [pair, span] : mandatory_lines) {
    bool found = false;
    for (auto& c : net.constraints) {
      if (c.relation.kind != RelationKind::Default && c.target == pair.first &&
          c.reference == pair.second) {
        c.mandatory = true;
        found = true;
      }
    }
    if (!found) {
      fail(span, "mandatory line names pair (" + pair.first + "," +
                     pair.second + ") with no rel/disj constraint");
    }
  }

  require_valid(net);
  return net;
}

std::string serialize_network(const Network& net) {
  std::ostringstream os;
  os << "objects";
  for (const auto& o : net.objects) os << ' ' << o;
  os << '\n';

  for (const auto& c : net.constraints) {
    switch (c.relation.kind) {
      case RelationKind::Basic:
        os << "rel " << c.target << ' ' << c.reference << ' '
           << c.relation.disjuncts[0].token() << '\n';
        break;
      case RelationKind::Default:
        os << "default " << c.target << ' ' << c.reference << ' '
           << c.relation.disjuncts[0].token() << '\n';
        break;
      case RelationKind::Disjunctive: {
        os << "disj " << c.target << ' ' << c.reference << ' ';
        bool first = true;
        for (const auto& d : c.relation.disjuncts) {
          if (!first) os << " | ";
          first = false;
          os << d.token();
        }
        os << '\n';
        break;
      }
    }
  }
  for (const auto& c : net.constraints) {
    if (c.mandatory) {
      os << "mandatory " << c.target << ' ' << c.reference << '\n';
    }
  }
  for (const auto& name : net.ab_marks) os << "ab " << name << '\n';
  for (const auto& [t, r] : net.infer_requests) {
    os << "infer " << t << ' ' << r << '\n';
  }
  if (net.connected_mode) os << "connected\n";
  if (net.grid_override) {
    os << "grid " << net.grid_override->m << ' ' << net.grid_override->n << ' '
       << net.grid_override->p << '\n';
  }
  return os.str();
}

}  // namespace ncdc
