#include "systemp/agents/pipeline.hpp"

#include <sstream>

namespace systemp::agents {

namespace {

constexpr const char* kNoErrorReply = "the SysML V2 code contains no error";

llm::ChatRequest base_request(const PipelineConfig& config,
                              std::string system_prompt, std::string agent) {
    llm::ChatRequest request;
    request.system_prompt = std::move(system_prompt);
    request.model_id = config.request.model_id;
    request.temperature = config.request.temperature;
    request.max_output_tokens = config.request.max_output_tokens;
    request.agent = std::move(agent);
    return request;
}

std::string format_examples(const std::vector<spec::FewShotExample>& examples) {
    std::ostringstream out;
    for (const auto& example : examples) {
        out << "###{" << example.request.content << " : "
            << spec::to_json(example.specification) << "}###\n";
    }
    return out.str();
}

// Specification replies are dictionaries, fenced or bare; as a last
// resort the outermost brace span is tried.
std::string extract_dictionary_payload(const std::string& content) {
    auto fenced = llm::extract_fenced(content);
    if (fenced.had_fences) {
        return fenced.text;
    }
    std::size_t begin = content.find('{');
    std::size_t end = content.rfind('}');
    if (begin != std::string::npos && end != std::string::npos && begin < end) {
        return content.substr(begin, end - begin + 1);
    }
    return fenced.text;
}

}  // namespace

void PipelineConfig::validate() const {
    if (max_iterations < 1) {
        throw std::invalid_argument("max_iterations must be at least 1");
    }
    if (k_examples < 0) {
        throw std::invalid_argument("k_examples must be non-negative");
    }
    if (static_cast<int>(examples.size()) != k_examples) {
        throw std::invalid_argument(
            "examples list size must equal k_examples (" +
            std::to_string(examples.size()) + " vs " +
            std::to_string(k_examples) + ")");
    }
}

SpecificationExtraction run_specification_agent(
    llm::Backend& backend, const spec::NaturalLanguageRequest& request,
    const std::vector<spec::FewShotExample>& examples,
    const PipelineConfig& config) {
    if (static_cast<int>(examples.size()) != config.k_examples) {
        throw std::invalid_argument(
            "examples list size must equal k_examples");
    }
    if (request.content.empty()) {
        throw std::invalid_argument("request content must be non-empty");
    }

    std::string system = config.prompts.specification_generator;
    if (!examples.empty()) {
        system += "\n" + format_examples(examples);
    }

    llm::ChatRequest chat =
        base_request(config, std::move(system), kSpecificationAgent);
    chat.turns.push_back({llm::Role::User, request.content});

    constexpr int kMaxRetries = 2;
    std::string last_error;
    for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
        llm::ChatResponse response = backend.complete(chat);
        std::string payload = extract_dictionary_payload(response.content);
        try {
            SpecificationExtraction extraction;
            extraction.specification =
                spec::from_json(payload, &extraction.warnings);
            extraction.retry_count = attempt;
            return extraction;
        } catch (const spec::SpecError& e) {
            last_error = e.what();
            chat.turns.push_back({llm::Role::Assistant, response.content});
            chat.turns.push_back(
                {llm::Role::User,
                 "The previous reply could not be parsed as a specification "
                 "dictionary: " +
                     last_error +
                     ". Reply with only the corrected JSON dictionary."});
        }
    }
    throw SpecificationExtractionFailed(
        "specification extraction failed after " +
        std::to_string(kMaxRetries + 1) + " attempts: " + last_error);
}

std::string run_writer(llm::Backend& backend,
                       const spec::StructuredSpecification& specification,
                       const std::optional<skeleton::SkeletonText>& skeleton,
                       const std::string& parser_reply,
                       const PipelineConfig& config) {
    std::string system = skeleton ? config.prompts.writer_with_template
                                  : config.prompts.writer_without_template;
    std::string content = spec::to_json(specification);
    if (skeleton) {
        content += "\n\n" + skeleton->text;
    }
    if (!parser_reply.empty()) {
        content += "\n\n" + parser_reply;
    }

    llm::ChatRequest chat = base_request(config, std::move(system), kWriterAgent);
    chat.turns.push_back({llm::Role::User, std::move(content)});

    llm::ChatResponse response = backend.complete(chat);
    std::string payload = llm::extract_fenced(response.content).text;
    if (payload.empty()) {
        throw EmptyCompletion("writer returned a blank completion");
    }
    return payload;
}

ParserAgentResult run_parser_agent(const std::string& model_text) {
    ParserAgentResult result;
    result.report = sysml::parse(model_text);
    if (result.report.error_count == 0) {
        result.reply = kNoErrorReply;
        return result;
    }
    std::ostringstream reply;
    reply << "Your code contains error:";
    for (const auto& diagnostic : result.report.diagnostics) {
        if (diagnostic.severity != sysml::Severity::Error) {
            continue;
        }
        reply << "\nError: " << diagnostic.message << " (line "
              << diagnostic.line << ", column " << diagnostic.column << ")";
    }
    result.reply = reply.str();
    return result;
}

PipelineResult run_pipeline_with_specification(
    llm::Backend& backend, const std::string& scenario_id,
    const spec::StructuredSpecification& specification,
    const PipelineConfig& config) {
    config.validate();

    PipelineResult result;
    result.scenario_id = scenario_id;
    result.specification = specification;

    if (config.use_template) {
        if (config.llm_template_adaptation) {
            skeleton::AdaptedSkeleton adapted = skeleton::llm_adapt_then_render(
                backend, specification, config.prompts.template_generator,
                config.render_options, config.request);
            result.skeleton = std::move(adapted.skeleton);
            result.skeleton_used_fallback = adapted.used_fallback;
        } else {
            result.skeleton =
                skeleton::render_skeleton(specification, config.render_options);
        }
    }

    std::string parser_reply;
    for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
        std::string model_text;
        try {
            model_text = run_writer(backend, specification, result.skeleton,
                                    parser_reply, config);
        } catch (const EmptyCompletion& e) {
            if (iteration == 1) {
                throw WriterFailed(std::string("first writer iteration "
                                               "failed: ") +
                                   e.what());
            }
            IterationTrace repeat = result.traces.back();
            repeat.iteration = iteration;
            result.traces.push_back(std::move(repeat));
            continue;
        }

        ParserAgentResult parsed = run_parser_agent(model_text);
        IterationTrace trace;
        trace.iteration = iteration;
        trace.model_text = std::move(model_text);
        trace.error_count = parsed.report.error_count;
        trace.diagnostics = parsed.report.diagnostics;
        trace.parser_reply = parsed.reply;
        result.traces.push_back(std::move(trace));

        if (parsed.report.error_count == 0) {
            result.converged = true;
            break;
        }
        parser_reply = parsed.reply;
    }

    result.final_model_text = result.traces.back().model_text;
    return result;
}

PipelineResult run_pipeline(llm::Backend& backend,
                            const spec::NaturalLanguageRequest& request,
                            const PipelineConfig& config) {
    config.validate();
    SpecificationExtraction extraction =
        run_specification_agent(backend, request, config.examples, config);
    PipelineResult result = run_pipeline_with_specification(
        backend, request.scenario_id, extraction.specification, config);
    result.spec_retry_count = extraction.retry_count;
    return result;
}

}  // namespace systemp::agents
