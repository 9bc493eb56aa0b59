#pragma once

#include <string>

#include "systemp/sysml/ast.hpp"

namespace systemp::sysml {

// Canonical textual form: 4-space indentation, one member per line, doc
// blocks as `doc /* ... */`, no trailing whitespace, and a single final
// newline (empty models print as the empty string). Deterministic:
// identical models produce byte-identical text.
std::string pretty_print(const SysmlModel& model);

}  // namespace systemp::sysml
