#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ncdc3d/asp_emit.hpp"
#include "ncdc3d/parser.hpp"
#include "ncdc3d/semantics.hpp"
#include "ncdc3d/solver.hpp"

using namespace ncdc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Network fixture(const std::string& name) {
  return parse_network(slurp(std::string(FIXTURE_DIR) + "/" + name));
}

// Multiset of whitespace-normalized atoms, comments stripped. Statements
// end at a period outside parentheses, so range tokens stay intact.
std::multiset<std::string> atom_set(const std::string& text) {
  std::multiset<std::string> out;
  std::string cur;
  bool in_comment = false;
  int depth = 0;
  for (char c : text) {
    if (in_comment) {
      if (c == '\n') in_comment = false;
      continue;
    }
    if (c == '%') {
      in_comment = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '(') ++depth;
    if (c == ')') --depth;
    cur.push_back(c);
    if (c == '.' && depth == 0) {
      out.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

std::map<std::string, int> atom_counts_by_name(
    const std::multiset<std::string>& atoms) {
  std::map<std::string, int> out;
  for (const auto& a : atoms) {
    out[a.substr(0, a.find('('))]++;
  }
  return out;
}

}  // namespace

TEST_CASE("marine facts equal the reference listing as a set") {
  auto emitted = atom_set(emit_facts(fixture("marine.ncdc")));
  auto golden =
      atom_set(slurp(std::string(FIXTURE_DIR) + "/golden/marine_facts.lp"));
  CHECK(emitted == golden);
  CHECK(emitted.count("relation(2,1,swb).") == 1);
  CHECK(emitted.count("relation(2,1,seb).") == 1);
  CHECK(emitted.count("toinfer(5,1).") == 1);
}

TEST_CASE("building facts equal the reference listing as a set") {
  auto emitted = atom_set(emit_facts(fixture("building_b1.ncdc")));
  auto golden =
      atom_set(slurp(std::string(FIXTURE_DIR) + "/golden/building_facts.lp"));
  CHECK(emitted == golden);
  CHECK(emitted.count("disjrelation(2,1,1,nm).") == 1);
  CHECK(emitted.count("disjrelation(2,1,2,nb).") == 1);
  CHECK(emitted.count("mandatory(2,1).") == 1);
  CHECK(emitted.count("defaultrelation(4,1,swb).") == 1);
}

TEST_CASE("forensics facts have the expected atom-count structure") {
  auto d1 = atom_counts_by_name(atom_set(emit_facts(fixture(
      "forensics_d1.ncdc"))));
  auto d2 = atom_counts_by_name(atom_set(emit_facts(fixture(
      "forensics_d2.ncdc"))));
  CHECK(d1["alltiles"] == 27);
  CHECK(d2["alltiles"] == 27);
  CHECK(d1["relation"] == 13);
  CHECK(d1["disjrelation"] == 2);
  CHECK(d1["defaultrelation"] == 3);
  CHECK(d2["relation"] == 12);
  CHECK(d2["disjrelation"] == 0);
  CHECK(d2["defaultrelation"] == 3);
  // the two instances jointly carry the 17/2/3 relation structure of the
  // combined listing (the statement-specific atoms differ per instance)
  CHECK(d1["relation"] + (d2["relation"] - 8) == 17);
}

TEST_CASE("an empty two-object network emits only ids and the tile "
          "alphabet") {
  Network net;
  net.objects = {"a", "b"};
  auto atoms = atom_set(emit_facts(net));
  CHECK(atoms.size() == 28);
  CHECK(atoms.count("object(1..2).") == 1);
  CHECK(atoms.count("alltiles(om).") == 1);
}

TEST_CASE("ab marks are emitted as facts") {
  Network net;
  net.objects = {"Terrace", "Entrance"};
  net.constraints.push_back(
      {"Terrace", "Entrance", Relation::fallback(BasicRelation(1u << 3)),
       false});
  net.ab_marks.insert("Entrance");
  auto atoms = atom_set(emit_facts(net));
  CHECK(atoms.count("ab(2).") == 1);
  std::string prog = emit_program(net, GridSpec{3, 3, 3}, AspMode::Check);
  CHECK(prog.find("-drel(U,V) :- ab(V), existdefrel(U,V).") !=
        std::string::npos);
  CHECK(prog.find("-drel(U,V) :- ab(U), existdefrel(U,V).") !=
        std::string::npos);
  CHECK(validate_asp_syntax(prog) == "");
}

TEST_CASE("object numbering follows declaration order") {
  Network net = fixture("marine.ncdc");
  ObjectNumbering num(net);
  CHECK(num.id_of("SedRock") == 1);
  CHECK(num.id_of("Marsh") == 2);
  CHECK(num.name_of(5) == "Fungi");
  std::string facts = emit_facts(net);
  CHECK(facts.find("% 1 = SedRock") != std::string::npos);
}

TEST_CASE("check-mode programs stay within the basic rule families") {
  Network net = fixture("marine.ncdc");
  std::string prog = emit_program(net, grid_for(net), AspMode::Check);
  CHECK(prog.find("violated(U,V)") != std::string::npos);
  CHECK(prog.find(":- violated(U,V), existrel(U,V).") != std::string::npos);
  // no disjunctive or default machinery for a purely basic network
  CHECK(prog.find("violateddef") == std::string::npos);
  CHECK(prog.find("chosen") == std::string::npos);
  CHECK(prog.find("drel") == std::string::npos);
  CHECK(prog.find(":~") == std::string::npos);
}

TEST_CASE("each tile family appears twice per enabled relation kind") {
  Network net = fixture("building_b1.ncdc");
  std::string prog = emit_program(net, grid_for(net), AspMode::Check);
  int c1 = 0, c2 = 0;
  for (size_t pos = 0; (pos = prog.find("violated(U,V) :-", pos)) !=
                       std::string::npos;
       pos += 10) {
    ++c1;
  }
  for (size_t pos = 0; (pos = prog.find("violateddef(U,V) :-", pos)) !=
                       std::string::npos;
       pos += 10) {
    ++c2;
  }
  CHECK(c1 == 54);  // 27 tiles x (C1 + C2)
  CHECK(c2 == 54);
}

TEST_CASE("explain mode guards mandatory pairs and weights the rest") {
  Network net = fixture("building_b1.ncdc");
  std::string prog = emit_program(net, grid_for(net), AspMode::Explain);
  CHECK(prog.find(":- violated(U,V), mandatory(U,V), existrel(U,V).") !=
        std::string::npos);
  CHECK(prog.find(":~ violated(U,V), not mandatory(U,V), existrel(U,V). "
                  "[1@2,U,V]") != std::string::npos);
  CHECK(prog.find(":~ -drel(U,V), existdefrel(U,V). [1@1,U,V]") !=
        std::string::npos);
}

TEST_CASE("explain mode without mandatory pairs weights every violation") {
  Network net = fixture("marine.ncdc");
  std::string prog = emit_program(net, grid_for(net), AspMode::Explain);
  CHECK(prog.find(":~ violated(U,V), existrel(U,V). [1@2,U,V]") !=
        std::string::npos);
  CHECK(prog.find("mandatory") == std::string::npos);
}

TEST_CASE("infer mode generates relations for unknown requested pairs") {
  Network net = fixture("marine.ncdc");
  std::string prog = emit_program(net, grid_for(net), AspMode::Infer);
  CHECK(prog.find("known(U,V) :- existrel(U,V).") != std::string::npos);
  CHECK(prog.find("1 { infer(U,V,R) : alltiles(R) } :- toinfer(U,V), not "
                  "known(U,V).") != std::string::npos);
  CHECK(prog.find(":- inferviolated(U,V), existinfer(U,V).") !=
        std::string::npos);
}

TEST_CASE("connected mode emits the stem-cell reachability rules") {
  Network net = fixture("marine.ncdc");
  net.connected_mode = true;
  std::string prog = emit_program(net, grid_for(net), AspMode::Check);
  CHECK(prog.find("stem(U,Xi,Ym,Zm)") != std::string::npos);
  CHECK(prog.find("connset(U,X,Y,Z) :- stem(U,X,Y,Z).") != std::string::npos);
  CHECK(prog.find(":- occ(U,X,Y,Z), not connset(U,X,Y,Z), target(U).") !=
        std::string::npos);
  // every constrained target is listed
  CHECK(prog.find("target(2).") != std::string::npos);
  CHECK(prog.find("target(1).") == std::string::npos);  // SedRock never is
}

TEST_CASE("every emitted program passes the grammar check") {
  for (const char* name :
       {"marine.ncdc", "building_b1.ncdc", "building_b1p.ncdc",
        "forensics_d1.ncdc", "forensics_d2.ncdc", "appendix_b.ncdc"}) {
    Network net = fixture(name);
    for (AspMode mode : {AspMode::Check, AspMode::Explain, AspMode::Infer}) {
      std::string text =
          emit_facts(net) + "\n" + emit_program(net, grid_for(net), mode);
      CHECK(validate_asp_syntax(text) == "");
    }
    net.connected_mode = true;
    std::string text = emit_facts(net) + "\n" +
                       emit_program(net, grid_for(net), AspMode::Check);
    CHECK(validate_asp_syntax(text) == "");
  }
}

TEST_CASE("the grammar check rejects broken statements") {
  CHECK(validate_asp_syntax("object(1..2)") != "");          // no period
  CHECK(validate_asp_syntax("p(a. q(b).") != "");            // unbalanced
  CHECK(validate_asp_syntax(":~ p(X). ") != "");             // missing [w@p]
  CHECK(validate_asp_syntax("p(X) :- q(X) :- r(X).") != ""); // two arrows
  CHECK(validate_asp_syntax("p(X) :- q(X). [1@2]") != "");   // stray weight
  CHECK(validate_asp_syntax("#minimize{x}.") != "");         // unknown directive
  CHECK(validate_asp_syntax("p(a).\nq(X) :- p(X).\n") == "");
}

TEST_CASE("decoding two singleton objects") {
  Network net;
  net.objects = {"a", "b"};
  Solution sol =
      decode_answer_set("occ(1,1,1,1). occ(2,2,2,2).", net, {2, 2, 2});
  REQUIRE(sol.assignment.size() == 2);
  CHECK(sol.assignment[0].cells == std::vector<Cell>{{1, 1, 1}});
  CHECK(sol.assignment[1].cells == std::vector<Cell>{{2, 2, 2}});
}

TEST_CASE("decoding tolerates solver-style atom lists") {
  Network net;
  net.objects = {"a"};
  Solution sol = decode_answer_set("occ(1,1,1,1) occ(1,2,1,1)\n", net,
                                   {2, 2, 2});
  CHECK(sol.assignment[0].cells.size() == 2);
}

TEST_CASE("decode errors: missing object, bad coordinates, malformed atoms") {
  Network net;
  net.objects = {"a", "b"};
  CHECK_THROWS_AS(decode_answer_set("occ(1,1,1,1).", net, {2, 2, 2}),
                  DecodeError);
  CHECK_THROWS_AS(
      decode_answer_set("occ(1,5,1,1). occ(2,1,1,1).", net, {2, 2, 2}),
      DecodeError);
  CHECK_THROWS_AS(
      decode_answer_set("occ(1,x,1,1). occ(2,1,1,1).", net, {2, 2, 2}),
      DecodeError);
  CHECK_THROWS_AS(decode_answer_set("occ(3,1,1,1).", net, {2, 2, 2}),
                  DecodeError);
}

TEST_CASE("decoded drel atoms mark applied defaults") {
  Network net;
  net.objects = {"a", "b"};
  net.constraints.push_back(
      {"a", "b", Relation::fallback(BasicRelation(1u << 0)), false});
  Solution applied = decode_answer_set("occ(1,1,1,1) occ(2,2,2,2) drel(1,2)",
                                       net, {2, 2, 2});
  CHECK(applied.dropped_defaults.empty());
  Solution dropped =
      decode_answer_set("occ(1,1,1,1) occ(2,2,2,2)", net, {2, 2, 2});
  REQUIRE(dropped.dropped_defaults.size() == 1);
  CHECK(dropped.cost == std::pair<int, int>{0, 1});
}

TEST_CASE("a solver witness rendered as occ atoms decodes and re-checks") {
  Network net = fixture("marine.ncdc");
  Verdict v = check(net);
  REQUIRE(v.outcome == Outcome::Consistent);

  std::ostringstream atoms;
  for (size_t i = 0; i < net.objects.size(); ++i) {
    for (const Cell& c : v.solution->assignment[i].cells) {
      atoms << "occ(" << (i + 1) << "," << c.x << "," << c.y << "," << c.z
            << ") ";
    }
  }
  Solution sol = decode_answer_set(atoms.str(), net, v.solution->grid);
  for (const auto& c : net.constraints) {
    const SpatialObject& a = sol.assignment[net.index_of(c.target)];
    const SpatialObject& b = sol.assignment[net.index_of(c.reference)];
    CHECK(satisfies_basic(a, b, c.relation.disjuncts[0]));
  }
}

TEST_CASE("external grounder round-trip when one is installed") {
  if (std::system("command -v clingo >/dev/null 2>&1") != 0) {
    MESSAGE("clingo not found; external round-trip skipped");
    return;
  }
  Network net = fixture("marine.ncdc");
  GridSpec grid = grid_for(net);
  std::string path = "/tmp/ncdc3d_marine.lp";
  {
    std::ofstream out(path);
    out << emit_facts(net) << "\n" << emit_program(net, grid, AspMode::Check);
  }
  std::string cmd = "clingo --verbose=0 " + path + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[4096];
  while (fgets(buf, sizeof buf, pipe)) output += buf;
  pclose(pipe);
  REQUIRE(output.find("UNSATISFIABLE") == std::string::npos);
  std::string atoms = output.substr(0, output.find("SATISFIABLE"));
  Solution sol = decode_answer_set(atoms, net, grid);
  for (const auto& c : net.constraints) {
    CHECK(satisfies_basic(sol.assignment[net.index_of(c.target)],
                          sol.assignment[net.index_of(c.reference)],
                          c.relation.disjuncts[0]));
  }
}
