#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ncdc3d/asp_emit.hpp"
#include "ncdc3d/model.hpp"
#include "ncdc3d/oracle.hpp"
#include "ncdc3d/parser.hpp"
#include "ncdc3d/semantics.hpp"
#include "ncdc3d/solver.hpp"

namespace {

using json = nlohmann::json;
using namespace ncdc;

constexpr int kExitOk = 0;
constexpr int kExitInconsistent = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUnknown = 3;

struct CommonOpts {
  std::string input;
  std::vector<int> grid;
  bool connected = false;
  bool disconnected = false;
  bool structured = false;
  uint64_t budget = SolverConfig{}.node_budget;
  double time_budget = 0.0;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool solver_opts = true) {
  cmd->add_option("input", o.input, "network file ('-' for stdin)")
      ->required();
  cmd->add_option("--grid", o.grid, "override grid size (m n p)")
      ->expected(3);
  cmd->add_flag("--connected", o.connected, "force connected objects");
  cmd->add_flag("--disconnected", o.disconnected,
                "allow disconnected objects");
  cmd->add_flag("--structured", o.structured, "machine-readable JSON output");
  if (solver_opts) {
    cmd->add_option("--budget", o.budget, "search node budget");
    cmd->add_option("--time-budget", o.time_budget,
                    "wall-clock budget in seconds (0 = off)");
    cmd->add_option("--workers", o.workers,
                    "parallel workers (0 = all cores)");
  }
}

Network load_network(const CommonOpts& o) {
  std::string text;
  if (o.input == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    text = buf.str();
  } else {
    std::ifstream in(o.input);
    if (!in) throw std::runtime_error("cannot open '" + o.input + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  Network net = parse_network(text);
  if (!o.grid.empty()) {
    net.grid_override = GridSpec{o.grid[0], o.grid[1], o.grid[2]};
  }
  if (o.connected) net.connected_mode = true;
  if (o.disconnected) net.connected_mode = false;
  return net;
}

SolverConfig solver_config(const CommonOpts& o) {
  SolverConfig cfg;
  cfg.node_budget = o.budget;
  cfg.time_budget_s = o.time_budget;
  cfg.workers = o.workers;
  return cfg;
}

json cells_json(const SpatialObject& obj) {
  json arr = json::array();
  for (const auto& c : obj.cells) arr.push_back({c.x, c.y, c.z});
  return arr;
}

json solution_objects(const Network& net, const Solution* sol) {
  json out = json::object();
  if (!sol) return out;
  for (size_t i = 0; i < net.objects.size(); ++i) {
    out[net.objects[i]] = cells_json(sol->assignment[i]);
  }
  return out;
}

json dropped_json(const Network& net, const Solution* sol) {
  json arr = json::array();
  if (!sol) return arr;
  for (const auto& d : sol->dropped_defaults) {
    arr.push_back({{"ab_forced", d.ab_forced},
                   {"pair", {net.objects[d.target], net.objects[d.reference]}}});
  }
  return arr;
}

json base_doc(const Network& net, const GridSpec& grid, const char* verdict,
              const Solution* sol, bool budget_exhausted) {
  json doc;
  doc["verdict"] = verdict;
  doc["grid"] = {grid.m, grid.n, grid.p};
  doc["objects"] = solution_objects(net, sol);
  doc["dropped_defaults"] = dropped_json(net, sol);
  doc["violated"] = json::array();
  doc["inferred"] = json::array();
  doc["cost"] = {sol ? sol->cost.first : 0, sol ? sol->cost.second : 0};
  doc["budget_exhausted"] = budget_exhausted;
  return doc;
}

void print_solution_human(const Network& net, const Solution& sol,
                          std::ostream& os) {
  for (size_t i = 0; i < net.objects.size(); ++i) {
    os << "  " << net.objects[i] << ":";
    for (const auto& c : sol.assignment[i].cells) {
      os << " (" << c.x << "," << c.y << "," << c.z << ")";
    }
    os << "\n";
  }
  for (const auto& d : sol.dropped_defaults) {
    os << "  dropped default " << net.objects[d.target] << " -> "
       << net.objects[d.reference] << (d.ab_forced ? " (ab)" : "") << "\n";
  }
}

int exit_code_for(Outcome o) {
  switch (o) {
    case Outcome::Consistent: return kExitOk;
    case Outcome::Inconsistent: return kExitInconsistent;
    default: return kExitUnknown;
  }
}

int run_check(const CommonOpts& o) {
  Network net = load_network(o);
  GridSpec grid = grid_for(net);
  Verdict v = check(net, solver_config(o));

  if (o.structured) {
    json doc = base_doc(net, grid, outcome_name(v.outcome),
                        v.solution ? &*v.solution : nullptr,
                        v.budget_exhausted);
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "verdict: " << outcome_name(v.outcome) << "\n";
    std::cout << "grid: " << grid.m << "x" << grid.n << "x" << grid.p
              << (v.grid_complete ? "" : " (below the deciding bound)")
              << "\n";
    if (v.outcome == Outcome::NotFoundAtGrid) {
      std::cout << "no solution found at this grid; the grid is below the "
                   "deciding bound, so inconsistency is not established\n";
    }
    if (v.solution) {
      std::cout << "cost: [" << v.solution->cost.first << ","
                << v.solution->cost.second << "]\n";
      print_solution_human(net, *v.solution, std::cout);
    }
    std::cout << "nodes: " << v.stats.nodes << "\n";
  }
  return exit_code_for(v.outcome);
}

int run_explain(const CommonOpts& o) {
  Network net = load_network(o);
  GridSpec grid = grid_for(net);
  Explanation ex = explain(net, solver_config(o));

  if (ex.no_explanation) {
    if (o.structured) {
      json doc = base_doc(net, grid, "no_explanation", nullptr,
                          ex.budget_exhausted);
      std::cout << doc.dump(2) << "\n";
    } else {
      std::cout << "no explanation: the mandatory constraints alone are "
                   "inconsistent\n";
    }
    return kExitInconsistent;
  }

  if (o.structured) {
    json doc = base_doc(net, grid, "explained",
                        ex.witness ? &*ex.witness : nullptr,
                        ex.budget_exhausted);
    json viol = json::array();
    for (const auto& [t, r] : ex.violated) {
      viol.push_back({net.objects[t], net.objects[r]});
    }
    doc["violated"] = viol;
    doc["cost"] = {ex.cost.first, ex.cost.second};
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "cost: [" << ex.cost.first << "," << ex.cost.second << "]\n";
    if (ex.violated.empty()) {
      std::cout << "consistent; nothing to violate\n";
    }
    for (const auto& [t, r] : ex.violated) {
      std::cout << "violated: " << net.objects[t] << " -> " << net.objects[r]
                << "\n";
    }
    if (ex.witness) print_solution_human(net, *ex.witness, std::cout);
  }
  return kExitOk;
}

int run_infer(const CommonOpts& o, bool enumerate) {
  Network net = load_network(o);
  GridSpec grid = grid_for(net);
  SolverConfig cfg = solver_config(o);
  cfg.enumerate_infer = enumerate;
  InferResult res = infer(net, cfg);

  if (res.outcome != Outcome::Consistent) {
    if (o.structured) {
      json doc = base_doc(net, grid, outcome_name(res.outcome), nullptr,
                          res.budget_exhausted);
      std::cout << doc.dump(2) << "\n";
    } else {
      std::cout << "verdict: " << outcome_name(res.outcome) << "\n";
    }
    return exit_code_for(res.outcome);
  }

  if (o.structured) {
    json doc = base_doc(net, grid, "consistent",
                        res.witness ? &*res.witness : nullptr,
                        res.budget_exhausted);
    json inferred = json::array();
    for (const auto& p : res.pairs) {
      json rels = json::array();
      for (const auto& rel : p.relations) {
        json tiles = json::array();
        for (auto t : rel.tiles()) tiles.push_back(t.token());
        rels.push_back(tiles);
      }
      inferred.push_back({{"known", p.known},
                          {"pair", {net.objects[p.target],
                                    net.objects[p.reference]}},
                          {"relations", rels}});
    }
    doc["inferred"] = inferred;
    std::cout << doc.dump(2) << "\n";
  } else {
    for (const auto& p : res.pairs) {
      std::cout << "infer " << net.objects[p.target] << " -> "
                << net.objects[p.reference]
                << (p.known ? " (known)" : "") << ":";
      for (const auto& rel : p.relations) std::cout << " " << rel.token();
      std::cout << "\n";
    }
    if (res.budget_exhausted) {
      std::cout << "warning: budget exhausted; enumeration may be partial\n";
    }
  }
  return kExitOk;
}

int run_emit(const CommonOpts& o, const std::string& mode, bool facts_only,
             bool program_only) {
  Network net = load_network(o);
  GridSpec grid = grid_for(net);
  AspMode m = mode == "explain" ? AspMode::Explain
              : mode == "infer" ? AspMode::Infer
                                : AspMode::Check;
  if (!program_only) std::cout << emit_facts(net);
  if (!facts_only) std::cout << "\n" << emit_program(net, grid, m);
  return kExitOk;
}

int run_oracle(const CommonOpts& o, const std::string& mode) {
  Network net = load_network(o);
  GridSpec grid = grid_for(net);
  if (mode == "explain") {
    OracleExplanation ex = oracle_optimal_explanation(net, grid);
    if (ex.no_explanation) {
      std::cout << "no explanation\n";
      return kExitInconsistent;
    }
    std::cout << "min violated: " << ex.min_cost << "\n";
    for (const auto& set : ex.optimal_sets) {
      std::cout << "  {";
      for (size_t i = 0; i < set.size(); ++i) {
        if (i) std::cout << ", ";
        std::cout << net.objects[set[i].first] << "->"
                  << net.objects[set[i].second];
      }
      std::cout << "}\n";
    }
    return kExitOk;
  }
  if (mode == "infer") {
    for (const auto& [t, r] : net.infer_requests) {
      auto rels = oracle_infer_all(net, grid, t, r);
      std::cout << "infer " << t << " -> " << r << ":";
      for (const auto& rel : rels) std::cout << " " << rel.token();
      std::cout << "\n";
    }
    return kExitOk;
  }
  OracleVerdict v = oracle_check(net, grid);
  std::cout << "verdict: " << (v.consistent ? "consistent" : "inconsistent")
            << "\n";
  if (v.consistent) print_solution_human(net, v.solution, std::cout);
  return v.consistent ? kExitOk : kExitInconsistent;
}

int run_bench(const CommonOpts& o, int replicas, bool with_oracle) {
  Network base = load_network(o);
  SolverConfig cfg = solver_config(o);

  std::cout << "replicas |V| |C| grid verdict nodes cell_checks ms\n";
  for (int k = 1; k <= replicas; ++k) {
    Network net = replicate_network(base, k);
    if (base.grid_override) {
      // scale an explicit grid the same way the default bound scales
      int side = 2 * static_cast<int>(net.objects.size()) - 1;
      net.grid_override = GridSpec{side, side, side};
    }
    GridSpec grid = grid_for(net);
    Verdict v = check(net, cfg);
    std::cout << k << " " << net.objects.size() << " "
              << net.constraints.size() << " " << grid.m << "x" << grid.n
              << "x" << grid.p << " " << outcome_name(v.outcome) << " "
              << v.stats.nodes << " " << v.stats.cell_checks << " "
              << static_cast<long long>(v.stats.wall_s * 1000.0) << "\n";
  }

  if (with_oracle) {
    GridSpec tiny{2, 2, 2};
    try {
      auto t0 = std::chrono::steady_clock::now();
      OracleVerdict ov = oracle_check(base, tiny);
      double ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      std::cout << "oracle(2x2x2): "
                << (ov.consistent ? "consistent" : "inconsistent") << " "
                << static_cast<long long>(ms) << "ms\n";
    } catch (const CapExceeded& e) {
      std::cout << "oracle(2x2x2): skipped (" << e.message << ")\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reasoner for 3D cardinal-direction constraint networks"};
  app.require_subcommand(1);

  CommonOpts check_o, explain_o, infer_o, emit_o, oracle_o, bench_o;
  bool infer_enumerate = false;
  std::string emit_mode = "check", oracle_mode = "check";
  bool facts_only = false, program_only = false;
  int bench_replicas = 3;
  bool bench_oracle = false;

  auto* c_check = app.add_subcommand("check", "decide consistency");
  add_common(c_check, check_o);

  auto* c_explain =
      app.add_subcommand("explain", "minimal source of inconsistency");
  add_common(c_explain, explain_o);

  auto* c_infer = app.add_subcommand("infer", "infer missing relations");
  add_common(c_infer, infer_o);
  c_infer->add_flag("--enumerate", infer_enumerate,
                    "all realizable relations, not one witness");

  auto* c_emit =
      app.add_subcommand("emit", "compile to an answer-set program");
  add_common(c_emit, emit_o, false);
  c_emit->add_option("--mode", emit_mode, "check|explain|infer")
      ->check(CLI::IsMember({"check", "explain", "infer"}));
  c_emit->add_flag("--facts-only", facts_only, "emit instance facts only");
  c_emit->add_flag("--program-only", program_only, "emit rules only");

  auto* c_oracle =
      app.add_subcommand("oracle", "tiny-grid brute-force ground truth");
  add_common(c_oracle, oracle_o, false);
  c_oracle->add_option("--mode", oracle_mode, "check|explain|infer")
      ->check(CLI::IsMember({"check", "explain", "infer"}));

  auto* c_bench = app.add_subcommand(
      "bench", "replication scaling table (and oracle comparison)");
  add_common(c_bench, bench_o);
  c_bench->add_option("--replicas", bench_replicas, "largest replication");
  c_bench->add_flag("--oracle", bench_oracle,
                    "time the brute-force oracle on the base instance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_check->parsed()) return run_check(check_o);
    if (c_explain->parsed()) return run_explain(explain_o);
    if (c_infer->parsed()) return run_infer(infer_o, infer_enumerate);
    if (c_emit->parsed()) {
      return run_emit(emit_o, emit_mode, facts_only, program_only);
    }
    if (c_oracle->parsed()) return run_oracle(oracle_o, oracle_mode);
    if (c_bench->parsed()) {
      return run_bench(bench_o, bench_replicas, bench_oracle);
    }
  } catch (const ncdc::ParseError& e) {
    std::cerr << "parse error at line " << e.span.line << ", column "
              << e.span.column << ": " << e.message << "\n";
    return kExitUsage;
  } catch (const ncdc::ValidationError& e) {
    std::cerr << "invalid network:\n" << e.report.str();
    return kExitUsage;
  } catch (const ncdc::CapExceeded& e) {
    std::cerr << "oracle cap exceeded: " << e.message << "\n";
    return kExitUsage;
  } catch (const ncdc::DecodeError& e) {
    std::cerr << "decode error: " << e.message << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
