#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "systemp/agents/prompts.hpp"
#include "systemp/llm/gateway.hpp"
#include "systemp/skeleton/render.hpp"
#include "systemp/spec/specification.hpp"
#include "systemp/sysml/parser.hpp"

namespace systemp::agents {

// Scripted-provider routing keys, one per agent role.
inline constexpr const char* kSpecificationAgent = "specification";
inline constexpr const char* kTemplateAgent = "template";
inline constexpr const char* kWriterAgent = "writer";

class SpecificationExtractionFailed : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class WriterFailed : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class EmptyCompletion : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    // false selects the ablation arm that skips the skeleton stage.
    bool use_template = true;
    int max_iterations = 5;
    int k_examples = 3;
    std::vector<spec::FewShotExample> examples;
    skeleton::RenderOptions render_options;
    // Routes the template stage through the LLM adaptation step; the
    // default is the deterministic direct rendering.
    bool llm_template_adaptation = false;
    PromptCatalog prompts = default_prompt_catalog();
    skeleton::RequestSettings request;

    // Throws std::invalid_argument on max_iterations < 1 or an examples
    // list whose size differs from k_examples.
    void validate() const;
};

struct IterationTrace {
    int iteration = 0;
    std::string model_text;
    int error_count = 0;
    std::vector<sysml::Diagnostic> diagnostics;
    std::string parser_reply;
};

struct PipelineResult {
    std::string scenario_id;
    spec::StructuredSpecification specification;
    std::optional<skeleton::SkeletonText> skeleton;
    bool skeleton_used_fallback = false;
    int spec_retry_count = 0;
    std::vector<IterationTrace> traces;
    bool converged = false;
    std::string final_model_text;
};

struct SpecificationExtraction {
    spec::StructuredSpecification specification;
    int retry_count = 0;
    std::vector<std::string> warnings;
};

// Extracts the structured specification from a natural-language request
// via few-shot prompting. Malformed replies are retried up to twice with
// the parse failure appended as a corrective user turn.
SpecificationExtraction run_specification_agent(
    llm::Backend& backend, const spec::NaturalLanguageRequest& request,
    const std::vector<spec::FewShotExample>& examples,
    const PipelineConfig& config);

// One writer turn: the user content concatenates the serialized
// specification, the skeleton when the template arm is active, and the
// latest parser reply when non-empty. Returns the fenced payload of the
// completion. Throws EmptyCompletion on a blank extraction.
std::string run_writer(llm::Backend& backend,
                       const spec::StructuredSpecification& specification,
                       const std::optional<skeleton::SkeletonText>& skeleton,
                       const std::string& parser_reply,
                       const PipelineConfig& config);

struct ParserAgentResult {
    std::string reply;
    sysml::ParseReport report;
};

// Validates model text with the deterministic parser and phrases the
// outcome the way the parser agent replies: the fixed no-error sentence,
// or one located "Error: ..." line per diagnostic.
ParserAgentResult run_parser_agent(const std::string& model_text);

// Writer/parser repair loop over an already-extracted specification.
PipelineResult run_pipeline_with_specification(
    llm::Backend& backend, const std::string& scenario_id,
    const spec::StructuredSpecification& specification,
    const PipelineConfig& config);

// Full pipeline: specification extraction, optional skeleton rendering,
// then the repair loop until zero errors or the iteration budget runs out.
PipelineResult run_pipeline(llm::Backend& backend,
                            const spec::NaturalLanguageRequest& request,
                            const PipelineConfig& config);

}  // namespace systemp::agents
