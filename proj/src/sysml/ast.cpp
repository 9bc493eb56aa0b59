#include "systemp/sysml/ast.hpp"

#include <cctype>

namespace systemp::sysml {

bool is_valid_identifier(const std::string& text) {
    if (text.empty()) {
        return false;
    }
    auto first = static_cast<unsigned char>(text.front());
    if (!std::isalpha(first) && first != '_') {
        return false;
    }
    for (char c : text) {
        auto uc = static_cast<unsigned char>(c);
        if (!std::isalnum(uc) && uc != '_') {
            return false;
        }
    }
    return true;
}

namespace {

void count_member(const Member& member, ElementCounts& counts);

void count_members(const std::vector<Member>& members, ElementCounts& counts) {
    for (const auto& member : members) {
        count_member(member, counts);
    }
}

void count_package(const PackageDecl& pkg, ElementCounts& counts) {
    ++counts.packages;
    count_members(pkg.members, counts);
}

void count_member(const Member& member, ElementCounts& counts) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, PackageDecl>) {
                count_package(node, counts);
            } else if constexpr (std::is_same_v<T, PartDecl>) {
                ++counts.parts;
                count_members(node.members, counts);
            } else if constexpr (std::is_same_v<T, ActionDecl>) {
                ++counts.actions;
                count_members(node.members, counts);
            } else if constexpr (std::is_same_v<T, AttributeDecl>) {
                ++counts.attributes;
            } else if constexpr (std::is_same_v<T, RequirementDecl>) {
                ++counts.requirements;
                count_members(node.members, counts);
            } else if constexpr (std::is_same_v<T, ConstraintDecl>) {
                ++counts.constraints;
            }
        },
        member.node);
}

}  // namespace

ElementCounts count_elements(const SysmlModel& model) {
    ElementCounts counts;
    for (const auto& pkg : model.packages) {
        count_package(pkg, counts);
    }
    return counts;
}

}  // namespace systemp::sysml
