#include "systemp/skeleton/render.hpp"

#include <cctype>
#include <sstream>

#include "systemp/sysml/ast.hpp"
#include "systemp/sysml/lexer.hpp"
#include "systemp/sysml/printer.hpp"

namespace systemp::skeleton {

namespace {

constexpr const char* kPackageDoc =
    "This is the package containing the requirements";

// Doc payloads live inside /* */ blocks: the terminator sequence must not
// appear, and no line may end in whitespace.
std::string clean_doc_text(const std::string& raw) {
    std::string text = raw;
    for (std::size_t pos = text.find("*/"); pos != std::string::npos;
         pos = text.find("*/", pos + 2)) {
        text.replace(pos, 2, "* /");
    }
    std::ostringstream out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        while (!line.empty() &&
               std::isspace(static_cast<unsigned char>(line.back()))) {
            line.pop_back();
        }
        if (!first) {
            out << '\n';
        }
        out << line;
        first = false;
    }
    std::string result = out.str();
    std::size_t begin = result.find_first_not_of(" \t\n");
    if (begin == std::string::npos) {
        return "";
    }
    return result.substr(begin);
}

// Canonicalizes an opaque expression the same way the parser stores one:
// lexemes joined by single spaces. Rejects text that would break the
// skeleton's zero-error guarantee.
std::string canonical_expression(const std::string& raw, const char* what) {
    auto lexed = sysml::tokenize(raw);
    if (!lexed.diagnostics.empty()) {
        throw spec::SpecError(spec::SpecErrorKind::WrongShape, what,
                              std::string(what) + " contains unlexable text: " +
                                  lexed.diagnostics.front().message);
    }
    int depth = 0;
    std::string text;
    for (const auto& token : lexed.tokens) {
        if (token.kind == sysml::TokenKind::EndOfInput) {
            break;
        }
        if (token.is_punct(";")) {
            throw spec::SpecError(spec::SpecErrorKind::WrongShape, what,
                                  std::string(what) + " must not contain ';'");
        }
        if (token.is_punct("(") || token.is_punct("[") || token.is_punct("{")) {
            ++depth;
        } else if (token.is_punct(")") || token.is_punct("]") ||
                   token.is_punct("}")) {
            if (--depth < 0) {
                throw spec::SpecError(spec::SpecErrorKind::WrongShape, what,
                                      std::string(what) + " is unbalanced");
            }
        }
        if (!text.empty()) {
            text += ' ';
        }
        text += token.lexeme;
    }
    if (depth != 0) {
        throw spec::SpecError(spec::SpecErrorKind::WrongShape, what,
                              std::string(what) + " is unbalanced");
    }
    return text;
}

template <typename Record>
const std::vector<Record>* find_records(
    const std::vector<std::pair<std::string, std::vector<Record>>>& table,
    const std::string& requirement_name) {
    for (const auto& [name, records] : table) {
        if (name == requirement_name) {
            return &records;
        }
    }
    return nullptr;
}

sysml::AttributeDecl build_attribute(const AttributeRecord& record) {
    sysml::AttributeDecl attr;
    attr.name = spec::sanitize_identifier(record.attribute);
    if (record.value) {
        std::string expr = *record.value;
        if (record.units && !record.units->empty()) {
            expr += " " + *record.units;
        }
        attr.value_expr = canonical_expression(expr, "attribute value");
    }
    return attr;
}

}  // namespace

SkeletonText render_skeleton(const spec::StructuredSpecification& spec,
                             const RenderOptions& options) {
    sysml::PackageDecl pkg;
    pkg.name = spec::sanitize_identifier(spec.package_name);
    if (options.include_package_doc) {
        pkg.doc = kPackageDoc;
    }

    for (const auto& requirement : spec.requirements) {
        sysml::RequirementDecl req;
        req.name = spec::sanitize_identifier(requirement.name);
        std::string doc = clean_doc_text(requirement.description);

        if (const auto* records =
                find_records(options.attribute_records, requirement.name)) {
            for (const auto& record : *records) {
                req.members.push_back(sysml::Member{build_attribute(record)});
            }
        }
        if (const auto* records =
                find_records(options.constraint_records, requirement.name)) {
            for (const auto& record : *records) {
                if (record.formula) {
                    sysml::ConstraintDecl con;
                    con.required = true;
                    if (record.name) {
                        con.name = spec::sanitize_identifier(*record.name);
                    }
                    con.formula =
                        canonical_expression(*record.formula, "constraint");
                    req.members.push_back(sysml::Member{std::move(con)});
                } else if (record.description) {
                    std::string note = clean_doc_text(*record.description);
                    if (!note.empty()) {
                        doc += doc.empty() ? note : "\n" + note;
                    }
                }
            }
        }
        if (!doc.empty()) {
            req.doc = std::move(doc);
        }
        pkg.members.push_back(sysml::Member{std::move(req)});
    }

    sysml::SysmlModel model;
    model.packages.push_back(std::move(pkg));
    return SkeletonText{sysml::pretty_print(model)};
}

AdaptedSkeleton llm_adapt_then_render(llm::Backend& backend,
                                      const spec::StructuredSpecification& spec,
                                      const std::string& system_prompt,
                                      const RenderOptions& options,
                                      const RequestSettings& settings) {
    llm::ChatRequest request;
    request.system_prompt = system_prompt;
    request.turns.push_back({llm::Role::User, spec::to_json(spec)});
    request.model_id = settings.model_id;
    request.temperature = settings.temperature;
    request.max_output_tokens = settings.max_output_tokens;
    request.agent = "template";

    llm::ChatResponse response = backend.complete(request);
    std::string payload = llm::extract_fenced(response.content).text;
    try {
        spec::StructuredSpecification adapted = spec::from_json(payload);
        return {render_skeleton(adapted, options), false, ""};
    } catch (const spec::SpecError& e) {
        return {render_skeleton(spec, options), true, e.what()};
    }
}

}  // namespace systemp::skeleton
