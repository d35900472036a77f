#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ncdc3d/model.hpp"

namespace ncdc {

enum class AspMode { Check, Explain, Infer };

// Objects are numbered 1..|V| in declaration order; the mapping is echoed
// as comments in the emitted text.
struct ObjectNumbering {
  std::vector<std::string> names;  // names[i] has id i+1

  explicit ObjectNumbering(const Network& net) : names(net.objects) {}
  int id_of(std::string_view name) const;
  const std::string& name_of(int id) const { return names[id - 1]; }
};

// Instance facts: object(1..n), the 27 alltiles facts, then one
// relation/disjrelation/defaultrelation/mandatory/toinfer/ab atom per
// entry, using lowercase tile tokens and declaration-order ids.
std::string emit_facts(const Network& net);

// Self-contained rule program: bounding-box generation, cell assignment,
// projections, face witnesses, the 27 pairs of constraint-violation rule
// families, and per mode either the hard elimination rule, weak
// constraints at priority 2, or the inference generator. Families for
// disjunctive and default constraints are emitted only when the network
// uses them; connectedness rules only in connected mode.
std::string emit_program(const Network& net, const GridSpec& grid,
                         AspMode mode);

struct DecodeError {
  std::string message;
};

// Reads whitespace-separated atoms as printed by common answer-set
// solvers (occ/4, violated/2, drel/2; trailing periods tolerated) back
// into a Solution. Throws DecodeError for malformed atoms, objects with
// no cells, or out-of-grid coordinates.
Solution decode_answer_set(std::string_view text, const Network& net,
                           const GridSpec& grid);

// Lightweight well-formedness check for the emitted dialect (facts,
// rules, choice rules, weak constraints, #show; balanced terms,
// terminating periods). Returns an error description or empty string.
std::string validate_asp_syntax(std::string_view program);

}  // namespace ncdc
