#pragma once

#include <optional>
#include <string>

namespace systemp::sysml {

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string message;
    // 1-based. Column may point one past the end of a line (end-of-input
    // caret), never further.
    int line = 1;
    int column = 1;
    std::optional<std::string> expected;
    std::optional<std::string> found;

    bool operator==(const Diagnostic&) const = default;
};

}  // namespace systemp::sysml
