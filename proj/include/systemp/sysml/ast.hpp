#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace systemp::sysml {

// AST for the supported SysML v2 textual-notation subset. All nodes are
// plain value types, immutable by convention after construction, and safe
// to share across threads.

struct Member;

struct PackageDecl {
    std::string name;
    std::optional<std::string> doc;
    std::vector<Member> members;

    bool operator==(const PackageDecl&) const = default;
};

struct PartDecl {
    std::string name;
    std::vector<Member> members;
    // body_present false means the terse form `part x;`, so members is empty.
    bool body_present = false;

    bool operator==(const PartDecl&) const = default;
};

struct ActionDecl {
    std::string name;
    std::vector<Member> members;
    bool body_present = false;

    bool operator==(const ActionDecl&) const = default;
};

struct AttributeDecl {
    std::string name;
    // Qualified name in canonical form, e.g. "ISQ::mass".
    std::optional<std::string> type_ref;
    // Opaque balanced token sequence in canonical form (lexemes joined by
    // single spaces), e.g. "3 kg" or "( a + b ) * 2".
    std::optional<std::string> value_expr;

    bool operator==(const AttributeDecl&) const = default;
};

struct ConstraintDecl {
    // true when written `require constraint`.
    bool required = false;
    std::optional<std::string> name;
    // Opaque balanced expression in canonical form. nullopt is the terse
    // `constraint c;` form; an engaged empty string is `constraint c { }`.
    std::optional<std::string> formula;

    bool operator==(const ConstraintDecl&) const = default;
};

struct RequirementDecl {
    std::string name;
    std::optional<std::string> doc;
    // Only AttributeDecl and ConstraintDecl members are valid here.
    std::vector<Member> members;

    bool operator==(const RequirementDecl&) const = default;
};

struct Member {
    std::variant<PackageDecl, PartDecl, AttributeDecl, RequirementDecl,
                 ConstraintDecl, ActionDecl>
        node;

    bool operator==(const Member&) const = default;
};

struct SysmlModel {
    // Top level contains only package declarations.
    std::vector<PackageDecl> packages;

    bool operator==(const SysmlModel&) const = default;
};

// Identifier rule shared by the whole artifact: letter or underscore, then
// letters, digits, or underscores.
bool is_valid_identifier(const std::string& text);

struct ElementCounts {
    std::size_t packages = 0;
    std::size_t parts = 0;
    std::size_t attributes = 0;
    std::size_t requirements = 0;
    std::size_t constraints = 0;
    std::size_t actions = 0;

    bool operator==(const ElementCounts&) const = default;
};

// Counts declarations of each kind, recursing into nested bodies.
ElementCounts count_elements(const SysmlModel& model);

}  // namespace systemp::sysml
