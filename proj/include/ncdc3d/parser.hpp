#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "ncdc3d/model.hpp"

namespace ncdc {

struct SourceSpan {
  int line = 1;    // 1-based
  int column = 1;  // 1-based
};

struct ParseError {
  SourceSpan span;
  std::string message;  // includes expected tokens where applicable
};

// Reads the line-oriented network format:
//
//   objects <name>+
//   rel <target> <reference> <TILES>
//   disj <target> <reference> <TILES> ( | <TILES> )+
//   default <target> <reference> <TILES>
//   mandatory <target> <reference>
//   infer <target> <reference>
//   ab <name>
//   connected
//   grid <m> <n> <p>
//
// TILES is tile tokens joined by ':'; '#' starts a comment; names are
// case-sensitive identifiers, tile tokens case-insensitive. Undeclared
// names are appended to the object list in first-appearance order.
// The result always passes validate_network; otherwise ValidationError
// is thrown. Syntax problems throw ParseError with a span.
Network parse_network(std::string_view text);

// Canonical text: objects line first, constraints in stored order with
// tiles in canonical order, then mandatory/ab/infer/connected/grid lines.
// parse_network(serialize_network(n)) == n for validated networks.
std::string serialize_network(const Network& net);

}  // namespace ncdc
