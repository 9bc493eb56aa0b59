#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "systemp/llm/gateway.hpp"
#include "systemp/spec/specification.hpp"

namespace systemp::skeleton {

// Structured attribute bridging the flat specification record to
// `attribute <name> = <value> <units>;` lines.
struct AttributeRecord {
    std::string attribute;
    std::optional<std::string> value;
    std::optional<std::string> units;

    bool operator==(const AttributeRecord&) const = default;
};

struct ConstraintRecord {
    std::optional<std::string> name;
    // When present, rendered as `require constraint <name> { <formula> }`.
    // Without a formula the description joins the requirement's doc text;
    // bare prose is never emitted as a pseudo-formula.
    std::optional<std::string> formula;
    std::optional<std::string> description;

    bool operator==(const ConstraintRecord&) const = default;
};

struct RenderOptions {
    bool include_package_doc = false;
    // Keyed by the requirement's raw (pre-sanitization) name.
    std::vector<std::pair<std::string, std::vector<AttributeRecord>>>
        attribute_records;
    std::vector<std::pair<std::string, std::vector<ConstraintRecord>>>
        constraint_records;
};

struct SkeletonText {
    std::string text;

    bool operator==(const SkeletonText&) const = default;
};

// Deterministically renders a syntactically correct skeleton: one
// `requirement <SanitizedName> { doc /* <description> */ }` per
// specification requirement, in order, inside `package <SanitizedName>`.
// Output always parses with zero errors, carries no trailing whitespace,
// and is byte-stable for identical inputs. Throws spec::SpecError when a
// name is unrepresentable as an identifier.
SkeletonText render_skeleton(const spec::StructuredSpecification& spec,
                             const RenderOptions& options = {});

struct AdaptedSkeleton {
    SkeletonText skeleton;
    // true when the LLM reply could not be normalized and the direct
    // rendering path was used instead.
    bool used_fallback = false;
    std::string fallback_reason;
};

struct RequestSettings {
    std::string model_id;
    double temperature = 0.0;
    int max_output_tokens = 4096;
};

// Reproduces the adaptation path: sends the template-generator system
// prompt plus the serialized specification, normalizes the structured
// reply back into a specification, and renders it. Extraction failures
// fall back to render_skeleton(spec), which is total for valid inputs.
AdaptedSkeleton llm_adapt_then_render(llm::Backend& backend,
                                      const spec::StructuredSpecification& spec,
                                      const std::string& system_prompt,
                                      const RenderOptions& options = {},
                                      const RequestSettings& settings = {});

}  // namespace systemp::skeleton
