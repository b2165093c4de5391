#pragma once

#include <string>

#include "rolex/ast.hpp"

namespace rolex {

// Renders a Program as RC source. Parsing the output yields a structurally
// identical AST.
std::string toSource(const Program& p);

std::string typeToString(const Type& t);

// Structural AST comparison ignoring resolution annotations and positions.
bool structurallyEqual(const Program& a, const Program& b);

}  // namespace rolex
