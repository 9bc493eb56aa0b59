#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace systemp::cli {

// Exit codes, stable for scripting: 0 success/converged, 1 domain failure
// (lint errors, non-convergence, failed eval cells), 2 usage or input
// errors, 3 backend errors.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitDomainFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBackend = 3;

// Runs the command line given as plain arguments (no program name).
// Machine output (JSON, CSV, SysML text) goes to `out` or to files;
// human diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace systemp::cli
