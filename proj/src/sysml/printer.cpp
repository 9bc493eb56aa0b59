#include "systemp/sysml/printer.hpp"

#include <sstream>

namespace systemp::sysml {

namespace {

constexpr int kIndentWidth = 4;

class Printer {
   public:
    std::string print(const SysmlModel& model) {
        for (const auto& pkg : model.packages) {
            print_package(pkg, 0);
        }
        return out_.str();
    }

   private:
    std::ostringstream out_;

    void indent(int depth) {
        for (int i = 0; i < depth * kIndentWidth; ++i) {
            out_ << ' ';
        }
    }

    void print_doc(const std::string& doc, int depth) {
        indent(depth);
        out_ << "doc /* " << doc << " */\n";
    }

    void print_package(const PackageDecl& pkg, int depth) {
        indent(depth);
        out_ << "package " << pkg.name << " {\n";
        if (pkg.doc) {
            print_doc(*pkg.doc, depth + 1);
        }
        for (const auto& member : pkg.members) {
            print_member(member, depth + 1);
        }
        indent(depth);
        out_ << "}\n";
    }

    void print_body_decl(const char* keyword, const std::string& name,
                         const std::vector<Member>& members, bool body_present,
                         int depth) {
        indent(depth);
        out_ << keyword << ' ' << name;
        if (!body_present) {
            out_ << ";\n";
            return;
        }
        out_ << " {\n";
        for (const auto& member : members) {
            print_member(member, depth + 1);
        }
        indent(depth);
        out_ << "}\n";
    }

    void print_requirement(const RequirementDecl& req, int depth) {
        indent(depth);
        out_ << "requirement " << req.name;
        if (!req.doc && req.members.empty()) {
            out_ << ";\n";
            return;
        }
        out_ << " {\n";
        if (req.doc) {
            print_doc(*req.doc, depth + 1);
        }
        for (const auto& member : req.members) {
            print_member(member, depth + 1);
        }
        indent(depth);
        out_ << "}\n";
    }

    void print_attribute(const AttributeDecl& attr, int depth) {
        indent(depth);
        out_ << "attribute " << attr.name;
        if (attr.type_ref) {
            out_ << " : " << *attr.type_ref;
        }
        if (attr.value_expr) {
            out_ << " = " << *attr.value_expr;
        }
        out_ << ";\n";
    }

    void print_constraint(const ConstraintDecl& con, int depth) {
        indent(depth);
        if (con.required) {
            out_ << "require ";
        }
        out_ << "constraint";
        if (con.name) {
            out_ << ' ' << *con.name;
        }
        if (!con.formula) {
            out_ << ";\n";
        } else if (con.formula->empty()) {
            out_ << " { }\n";
        } else {
            out_ << " { " << *con.formula << " }\n";
        }
    }

    void print_member(const Member& member, int depth) {
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, PackageDecl>) {
                    print_package(node, depth);
                } else if constexpr (std::is_same_v<T, PartDecl>) {
                    print_body_decl("part", node.name, node.members,
                                    node.body_present, depth);
                } else if constexpr (std::is_same_v<T, ActionDecl>) {
                    print_body_decl("action", node.name, node.members,
                                    node.body_present, depth);
                } else if constexpr (std::is_same_v<T, AttributeDecl>) {
                    print_attribute(node, depth);
                } else if constexpr (std::is_same_v<T, RequirementDecl>) {
                    print_requirement(node, depth);
                } else if constexpr (std::is_same_v<T, ConstraintDecl>) {
                    print_constraint(node, depth);
                }
            },
            member.node);
    }
};

}  // namespace

std::string pretty_print(const SysmlModel& model) {
    return Printer{}.print(model);
}

}  // namespace systemp::sysml
