#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "systemp/sysml/ast.hpp"
#include "systemp/sysml/diagnostics.hpp"

namespace systemp::sysml {

struct ParseReport {
    std::vector<Diagnostic> diagnostics;
    // Number of diagnostics with severity Error.
    int error_count = 0;
    // Present exactly when error_count is 0.
    std::optional<SysmlModel> model;
};

// Parses the textual subset with multi-error recovery: on a syntax error
// the parser reports one diagnostic and skips to the next `;` or `}` at
// the current nesting level, so independent errors produce independent
// diagnostics. Never throws; every problem lands in the report.
ParseReport parse(std::string_view text);

// Lint alias of parse; identical contract.
ParseReport check(std::string_view text);

}  // namespace systemp::sysml
