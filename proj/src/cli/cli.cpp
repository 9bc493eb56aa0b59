#include "systemp/cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "systemp/agents/pipeline.hpp"
#include "systemp/eval/harness.hpp"
#include "systemp/llm/gateway.hpp"
#include "systemp/skeleton/render.hpp"
#include "systemp/spec/specification.hpp"
#include "systemp/sysml/parser.hpp"

#ifndef SYSTEMP_DEFAULT_DATA_DIR
#define SYSTEMP_DEFAULT_DATA_DIR "data"
#endif

namespace systemp::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value != nullptr && *value != '\0' ? value : fallback;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot open file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
    out << content;
}

bool is_blank(const std::string& text) {
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

struct BackendFlags {
    std::string provider;
    std::string model;
    std::string base_url;
    std::string api_key_env;
    std::string script;
    std::string cassette;
    std::string record;
    double timeout_seconds = 60.0;
    int max_retries = 2;
};

void add_backend_options(CLI::App* cmd, BackendFlags& flags) {
    cmd->add_option("--provider", flags.provider,
                    "Backend provider: openai|anthropic|scripted|replay "
                    "(default: $SYSTEMP_PROVIDER or scripted)");
    cmd->add_option("--model", flags.model,
                    "Model id (default: $SYSTEMP_MODEL)");
    cmd->add_option("--base-url", flags.base_url,
                    "HTTP provider base URL (default: $SYSTEMP_BASE_URL)");
    cmd->add_option("--api-key-env", flags.api_key_env,
                    "Environment variable holding the API key "
                    "(default: SYSTEMP_API_KEY)");
    cmd->add_option("--script", flags.script,
                    "Scripted provider response file");
    cmd->add_option("--cassette", flags.cassette,
                    "Replay provider cassette file");
    cmd->add_option("--record", flags.record,
                    "Record live exchanges into this cassette file");
    cmd->add_option("--timeout", flags.timeout_seconds,
                    "HTTP timeout in seconds");
    cmd->add_option("--max-retries", flags.max_retries,
                    "Retries for transient HTTP failures");
}

llm::BackendConfig backend_config_from(const BackendFlags& flags) {
    llm::BackendConfig config;
    std::string provider =
        flags.provider.empty() ? env_or("SYSTEMP_PROVIDER", "scripted")
                               : flags.provider;
    if (provider == "openai" || provider == "openai-compatible") {
        config.provider = llm::Provider::OpenAiCompatible;
    } else if (provider == "anthropic" || provider == "anthropic-compatible") {
        config.provider = llm::Provider::AnthropicCompatible;
    } else if (provider == "scripted") {
        config.provider = llm::Provider::Scripted;
    } else if (provider == "replay") {
        config.provider = llm::Provider::Replay;
    } else {
        throw UsageError("unknown provider: " + provider);
    }
    config.model_id = flags.model.empty() ? env_or("SYSTEMP_MODEL", "default")
                                          : flags.model;
    std::string base_url = flags.base_url.empty()
                               ? env_or("SYSTEMP_BASE_URL", "")
                               : flags.base_url;
    if (!base_url.empty()) {
        config.base_url = base_url;
    }
    if (!flags.api_key_env.empty()) {
        config.api_key_env = flags.api_key_env;
    }
    config.script_path = flags.script.empty()
                             ? env_or("SYSTEMP_SCRIPT", "")
                             : flags.script;
    config.cassette_path = flags.cassette;
    if (!flags.record.empty()) {
        config.record_path = flags.record;
    }
    config.timeout_seconds = flags.timeout_seconds;
    config.max_retries = flags.max_retries;

    if (config.provider == llm::Provider::Scripted &&
        config.script_path.empty()) {
        throw UsageError("the scripted provider requires --script <file>");
    }
    if (config.provider == llm::Provider::Replay &&
        config.cassette_path.empty()) {
        throw UsageError("the replay provider requires --cassette <file>");
    }
    return config;
}

struct PromptFlags {
    std::string prompts_dir;
};

agents::PromptCatalog catalog_from(const PromptFlags& flags) {
    if (flags.prompts_dir.empty()) {
        return agents::default_prompt_catalog();
    }
    return agents::load_prompt_catalog(flags.prompts_dir);
}

struct ExampleFlags {
    std::string examples_dir;
    int k_examples = -1;  // -1 means "use the command's default"
};

void add_example_options(CLI::App* cmd, ExampleFlags& flags) {
    cmd->add_option("--examples", flags.examples_dir,
                    "Directory of few-shot example JSON files");
    cmd->add_option("--k-examples", flags.k_examples,
                    "Number of few-shot examples to attach");
}

std::vector<spec::FewShotExample> load_examples(const fs::path& dir, int k) {
    if (k == 0) {
        return {};
    }
    if (!fs::is_directory(dir)) {
        throw UsageError("examples directory not found: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (static_cast<int>(files.size()) < k) {
        throw UsageError("need " + std::to_string(k) + " example files in " +
                         dir.string() + ", found " +
                         std::to_string(files.size()));
    }
    std::vector<spec::FewShotExample> examples;
    for (int i = 0; i < k; ++i) {
        examples.push_back(spec::example_from_json(read_file(files[i])));
    }
    return examples;
}

std::vector<spec::FewShotExample> resolve_examples(const ExampleFlags& flags,
                                                   int default_k) {
    int k = flags.k_examples >= 0 ? flags.k_examples : default_k;
    fs::path dir = flags.examples_dir.empty()
                       ? fs::path(SYSTEMP_DEFAULT_DATA_DIR) / "fewshot"
                       : fs::path(flags.examples_dir);
    return load_examples(dir, k);
}

std::string severity_name(sysml::Severity severity) {
    return severity == sysml::Severity::Error ? "error" : "warning";
}

nlohmann::ordered_json trace_to_json(const agents::PipelineResult& result,
                                     bool use_template) {
    nlohmann::ordered_json iterations = nlohmann::ordered_json::array();
    for (const auto& trace : result.traces) {
        nlohmann::ordered_json diagnostics = nlohmann::ordered_json::array();
        for (const auto& d : trace.diagnostics) {
            diagnostics.push_back({
                {"severity", severity_name(d.severity)},
                {"message", d.message},
                {"line", d.line},
                {"column", d.column},
            });
        }
        iterations.push_back({
            {"iteration", trace.iteration},
            {"error_count", trace.error_count},
            {"model_text", trace.model_text},
            {"parser_reply", trace.parser_reply},
            {"diagnostics", std::move(diagnostics)},
        });
    }
    nlohmann::ordered_json doc{
        {"scenario_id", result.scenario_id},
        {"arm", use_template ? "with_template" : "without_template"},
        {"converged", result.converged},
        {"spec_retry_count", result.spec_retry_count},
        {"iterations", std::move(iterations)},
    };
    if (result.skeleton) {
        doc["skeleton"] = result.skeleton->text;
        doc["skeleton_used_fallback"] = result.skeleton_used_fallback;
    }
    return doc;
}

struct SpecCmd {
    std::string input;
    std::string out;
    BackendFlags backend;
    ExampleFlags examples;
    PromptFlags prompts;
};

int cmd_spec(const SpecCmd& cmd, std::ostream& out, std::ostream& err) {
    std::string content = read_file(cmd.input);
    if (is_blank(content)) {
        throw UsageError("input file is empty: " + cmd.input);
    }
    auto backend = llm::make_backend(backend_config_from(cmd.backend));
    agents::PipelineConfig config;
    config.prompts = catalog_from(cmd.prompts);
    config.request.model_id = backend_config_from(cmd.backend).model_id;
    config.examples = resolve_examples(cmd.examples, 3);
    config.k_examples = static_cast<int>(config.examples.size());

    spec::NaturalLanguageRequest request{fs::path(cmd.input).stem().string(),
                                         content};
    agents::SpecificationExtraction extraction = agents::run_specification_agent(
        *backend, request, config.examples, config);
    for (const auto& warning : extraction.warnings) {
        err << "warning: " << warning << '\n';
    }
    std::string json = spec::to_json(extraction.specification) + "\n";
    if (cmd.out.empty()) {
        out << json;
    } else {
        write_file(cmd.out, json);
    }
    return kExitSuccess;
}

struct TemplateCmd {
    std::string input;
    std::string out;
    bool package_doc = false;
    bool llm_adapt = false;
    BackendFlags backend;
    PromptFlags prompts;
};

int cmd_template(const TemplateCmd& cmd, std::ostream& out, std::ostream& err) {
    spec::StructuredSpecification specification =
        spec::from_json(read_file(cmd.input));
    skeleton::RenderOptions options;
    options.include_package_doc = cmd.package_doc;

    skeleton::SkeletonText result;
    if (cmd.llm_adapt) {
        auto backend = llm::make_backend(backend_config_from(cmd.backend));
        skeleton::RequestSettings settings;
        settings.model_id = backend_config_from(cmd.backend).model_id;
        skeleton::AdaptedSkeleton adapted = skeleton::llm_adapt_then_render(
            *backend, specification, catalog_from(cmd.prompts).template_generator,
            options, settings);
        if (adapted.used_fallback) {
            err << "warning: template adaptation fell back to direct "
                   "rendering: "
                << adapted.fallback_reason << '\n';
        }
        result = std::move(adapted.skeleton);
    } else {
        result = skeleton::render_skeleton(specification, options);
    }

    if (cmd.out.empty()) {
        out << result.text;
    } else {
        write_file(cmd.out, result.text);
    }
    return kExitSuccess;
}

struct LintCmd {
    std::string input;
};

int cmd_lint(const LintCmd& cmd, std::ostream& err) {
    std::string text = read_file(cmd.input);
    sysml::ParseReport report = sysml::parse(text);
    for (const auto& diagnostic : report.diagnostics) {
        err << cmd.input << ':' << diagnostic.line << ':' << diagnostic.column
            << ": " << severity_name(diagnostic.severity) << ": "
            << diagnostic.message << '\n';
    }
    return report.error_count == 0 ? kExitSuccess : kExitDomainFailure;
}

struct GenerateCmd {
    std::string input;
    std::string out;
    std::string trace;
    bool no_template = false;
    bool llm_adapt = false;
    int max_iterations = 5;
    BackendFlags backend;
    ExampleFlags examples;
    PromptFlags prompts;
};

int cmd_generate(const GenerateCmd& cmd, std::ostream& out, std::ostream& err) {
    std::string content = read_file(cmd.input);
    if (is_blank(content)) {
        throw UsageError("input file is empty: " + cmd.input);
    }
    llm::BackendConfig backend_config = backend_config_from(cmd.backend);
    auto backend = llm::make_backend(backend_config);

    agents::PipelineConfig config;
    config.use_template = !cmd.no_template;
    config.max_iterations = cmd.max_iterations;
    config.llm_template_adaptation = cmd.llm_adapt;
    config.prompts = catalog_from(cmd.prompts);
    config.request.model_id = backend_config.model_id;
    config.examples = resolve_examples(cmd.examples, 3);
    config.k_examples = static_cast<int>(config.examples.size());

    spec::NaturalLanguageRequest request{fs::path(cmd.input).stem().string(),
                                         content};
    agents::PipelineResult result =
        agents::run_pipeline(*backend, request, config);

    std::string model_text = result.final_model_text;
    if (!model_text.empty() && model_text.back() != '\n') {
        model_text += '\n';
    }
    if (cmd.out.empty()) {
        out << model_text;
    } else {
        write_file(cmd.out, model_text);
    }

    std::string trace_path = cmd.trace;
    if (trace_path.empty() && !cmd.out.empty()) {
        trace_path = cmd.out + ".trace.json";
    }
    if (!trace_path.empty()) {
        write_file(trace_path,
                   trace_to_json(result, config.use_template).dump(4) + "\n");
    }

    if (!result.converged) {
        err << "did not converge after " << result.traces.size()
            << " iterations (" << result.traces.back().error_count
            << " errors remain)\n";
        return kExitDomainFailure;
    }
    return kExitSuccess;
}

struct EvalCmd {
    std::string scenarios;
    std::string arm = "both";
    std::string out;
    std::string format = "csv";
    int jobs = 1;
    BackendFlags backend;
    ExampleFlags examples;
    PromptFlags prompts;
};

int cmd_eval(const EvalCmd& cmd, std::ostream& err) {
    std::vector<eval::Scenario> scenarios = eval::load_scenarios(cmd.scenarios);

    eval::EvalConfig config;
    if (cmd.arm == "both") {
        config.arms = eval::ArmSelection::Both;
    } else if (cmd.arm == "with") {
        config.arms = eval::ArmSelection::WithOnly;
    } else if (cmd.arm == "without") {
        config.arms = eval::ArmSelection::WithoutOnly;
    } else {
        throw UsageError("--arm must be both, with, or without");
    }

    llm::BackendConfig backend_config = backend_config_from(cmd.backend);
    config.pipeline.prompts = catalog_from(cmd.prompts);
    config.pipeline.request.model_id = backend_config.model_id;
    config.pipeline.examples = resolve_examples(cmd.examples, 0);
    config.pipeline.k_examples =
        static_cast<int>(config.pipeline.examples.size());

    eval::AblationReport report =
        eval::run_ablation(backend_config, scenarios, config, cmd.jobs);

    eval::ReportFormat format = eval::ReportFormat::Csv;
    if (cmd.format == "json") {
        format = eval::ReportFormat::Json;
    } else if (cmd.format != "csv") {
        throw UsageError("--format must be csv or json");
    }
    eval::emit_report(report, format, cmd.out);

    for (const auto& note : report.notes) {
        err << "note: " << note << '\n';
    }
    return report.any_failed_cell() ? kExitDomainFailure : kExitSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"SysML v2 generation pipeline"};
    app.require_subcommand(1);

    SpecCmd spec_cmd;
    auto* spec_app = app.add_subcommand(
        "spec", "Extract a structured specification from natural language");
    spec_app->add_option("input", spec_cmd.input, "Natural-language text file")
        ->required();
    spec_app->add_option("--out", spec_cmd.out, "Output JSON file");
    add_backend_options(spec_app, spec_cmd.backend);
    add_example_options(spec_app, spec_cmd.examples);
    spec_app->add_option("--prompts-dir", spec_cmd.prompts.prompts_dir,
                         "Directory overriding the built-in prompts");

    TemplateCmd template_cmd;
    auto* template_app = app.add_subcommand(
        "template", "Render a SysML v2 skeleton from a specification JSON");
    template_app
        ->add_option("input", template_cmd.input, "Specification JSON file")
        ->required();
    template_app->add_option("--out", template_cmd.out, "Output .sysml file");
    template_app->add_flag("--package-doc", template_cmd.package_doc,
                           "Emit the package-level doc line");
    template_app->add_flag("--llm-adapt", template_cmd.llm_adapt,
                           "Route the specification through the LLM "
                           "adaptation step before rendering");
    add_backend_options(template_app, template_cmd.backend);
    template_app->add_option("--prompts-dir", template_cmd.prompts.prompts_dir,
                             "Directory overriding the built-in prompts");

    LintCmd lint_cmd;
    auto* lint_app =
        app.add_subcommand("lint", "Check SysML v2 text for syntax errors");
    lint_app->add_option("input", lint_cmd.input, "SysML v2 text file")
        ->required();

    GenerateCmd generate_cmd;
    auto* generate_app = app.add_subcommand(
        "generate", "Run the full pipeline on a natural-language request");
    generate_app
        ->add_option("input", generate_cmd.input, "Natural-language text file")
        ->required();
    generate_app->add_option("--out", generate_cmd.out,
                             "Output .sysml file (default: stdout)");
    generate_app->add_option("--trace", generate_cmd.trace,
                             "Iteration trace JSON file");
    generate_app->add_flag("--no-template", generate_cmd.no_template,
                           "Skip the skeleton stage (ablation arm)");
    generate_app->add_flag("--llm-adapt", generate_cmd.llm_adapt,
                           "Route the template stage through the LLM");
    generate_app->add_option("--max-iter", generate_cmd.max_iterations,
                             "Repair loop iteration budget");
    add_backend_options(generate_app, generate_cmd.backend);
    add_example_options(generate_app, generate_cmd.examples);
    generate_app->add_option("--prompts-dir", generate_cmd.prompts.prompts_dir,
                             "Directory overriding the built-in prompts");

    EvalCmd eval_cmd;
    auto* eval_app = app.add_subcommand(
        "eval", "Run the with/without-template ablation over scenarios");
    eval_app->add_option("--scenarios", eval_cmd.scenarios,
                         "Scenario directory or JSON array file")
        ->required();
    eval_app->add_option("--arm", eval_cmd.arm, "both|with|without");
    eval_app->add_option("--out", eval_cmd.out, "Report output path")
        ->required();
    eval_app->add_option("--format", eval_cmd.format, "csv|json");
    eval_app->add_option("--jobs", eval_cmd.jobs,
                         "Concurrent scenario workers (live providers only)");
    add_backend_options(eval_app, eval_cmd.backend);
    add_example_options(eval_app, eval_cmd.examples);
    eval_app->add_option("--prompts-dir", eval_cmd.prompts.prompts_dir,
                         "Directory overriding the built-in prompts");

    std::vector<const char*> argv;
    argv.push_back("systemp");
    for (const auto& arg : args) {
        argv.push_back(arg.c_str());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (spec_app->parsed()) {
            return cmd_spec(spec_cmd, out, err);
        }
        if (template_app->parsed()) {
            return cmd_template(template_cmd, out, err);
        }
        if (lint_app->parsed()) {
            return cmd_lint(lint_cmd, err);
        }
        if (generate_app->parsed()) {
            return cmd_generate(generate_cmd, out, err);
        }
        if (eval_app->parsed()) {
            return cmd_eval(eval_cmd, err);
        }
        err << "error: no subcommand given\n";
        return kExitUsage;
    } catch (const llm::AuthError& e) {
        err << "backend error: " << e.what() << '\n';
        return kExitBackend;
    } catch (const llm::TransportError& e) {
        err << "backend error: " << e.what() << '\n';
        return kExitBackend;
    } catch (const llm::ScriptExhausted& e) {
        err << "backend error: " << e.what() << '\n';
        return kExitBackend;
    } catch (const llm::CassetteMiss& e) {
        err << "backend error: " << e.what() << '\n';
        return kExitBackend;
    } catch (const agents::WriterFailed& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomainFailure;
    } catch (const agents::SpecificationExtractionFailed& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const spec::SpecError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const eval::MalformedScenario& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const eval::EmptyCorpus& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace systemp::cli
