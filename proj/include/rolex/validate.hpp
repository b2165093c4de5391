#pragma once

#include "rolex/ast.hpp"

namespace rolex {

// Resolves names and types (annotating the AST in place) and checks the
// language's static rules: structured-block containment, recovery-function
// signatures, tolerance limits against type widths, clause visibility,
// replicability of robust declarations. Diagnostics are the return value;
// an empty list means the program is well-formed.
std::vector<Diagnostic> validate(Program& program);

}  // namespace rolex
