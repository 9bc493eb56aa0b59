#include "systemp/eval/harness.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace systemp::eval {

namespace {

using nlohmann::ordered_json;

Scenario scenario_from_entry(const ordered_json& entry, std::string fallback_id,
                             const std::string& origin) {
    if (!entry.is_object()) {
        throw MalformedScenario("scenario entry in " + origin +
                                " is not an object");
    }
    if (entry.value("type", "") != "input") {
        return {};
    }
    if (!entry.contains("content") || !entry.at("content").is_string()) {
        throw MalformedScenario("scenario entry in " + origin +
                                " is missing string \"content\"");
    }
    Scenario scenario;
    scenario.id = entry.value("id", fallback_id);
    scenario.content = entry.at("content").get<std::string>();
    if (scenario.content.empty()) {
        throw MalformedScenario("scenario " + scenario.id +
                                " has empty content");
    }
    return scenario;
}

ordered_json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw MalformedScenario("cannot open scenario file: " + path.string());
    }
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedScenario("malformed scenario file " + path.string() +
                                ": " + e.what());
    }
}

std::vector<ReportRow> sentinel_rows(const std::string& scenario_id,
                                     const std::vector<Arm>& arms) {
    std::vector<ReportRow> rows;
    for (Arm arm : arms) {
        rows.push_back({scenario_id, arm, 1, kFailedCellSentinel});
    }
    return rows;
}

struct ScenarioOutcome {
    std::vector<ReportRow> rows;
    std::vector<std::pair<Arm, bool>> cell_converged;
    std::vector<Arm> failed_arms;
    std::vector<std::string> notes;
};

ScenarioOutcome run_scenario(llm::Backend& backend, const Scenario& scenario,
                             const std::vector<Arm>& arms,
                             const EvalConfig& config) {
    ScenarioOutcome outcome;

    spec::StructuredSpecification specification;
    try {
        agents::SpecificationExtraction extraction =
            agents::run_specification_agent(
                backend, {scenario.id, scenario.content},
                config.pipeline.examples, config.pipeline);
        specification = std::move(extraction.specification);
    } catch (const std::exception& e) {
        outcome.rows = sentinel_rows(scenario.id, arms);
        for (Arm arm : arms) {
            outcome.failed_arms.push_back(arm);
            outcome.notes.push_back(scenario.id + "/" + arm_name(arm) +
                                    ": specification extraction failed: " +
                                    e.what());
        }
        return outcome;
    }

    for (Arm arm : arms) {
        agents::PipelineConfig cell_config = config.pipeline;
        cell_config.use_template = arm == Arm::WithTemplate;
        try {
            agents::PipelineResult result =
                agents::run_pipeline_with_specification(
                    backend, scenario.id, specification, cell_config);
            for (const auto& trace : result.traces) {
                outcome.rows.push_back(
                    {scenario.id, arm, trace.iteration, trace.error_count});
            }
            outcome.cell_converged.emplace_back(arm, result.converged);
        } catch (const std::exception& e) {
            outcome.rows.push_back(
                {scenario.id, arm, 1, kFailedCellSentinel});
            outcome.failed_arms.push_back(arm);
            outcome.notes.push_back(scenario.id + "/" + arm_name(arm) + ": " +
                                    e.what());
        }
    }
    return outcome;
}

AblationReport assemble(const std::vector<ScenarioOutcome>& outcomes,
                        const std::vector<Arm>& arms, std::size_t total,
                        const std::string& model_id) {
    AblationReport report;
    report.arms = arms;
    report.model_id = model_id;

    for (const auto& outcome : outcomes) {
        report.rows.insert(report.rows.end(), outcome.rows.begin(),
                           outcome.rows.end());
        report.notes.insert(report.notes.end(), outcome.notes.begin(),
                            outcome.notes.end());
    }

    for (Arm arm : arms) {
        ArmSummary summary;
        summary.total_scenarios = static_cast<int>(total);
        long long error_sum = 0;
        long long row_count = 0;
        for (const auto& outcome : outcomes) {
            for (const auto& [cell_arm, converged] : outcome.cell_converged) {
                if (cell_arm == arm && converged) {
                    ++summary.converged_scenarios;
                }
            }
            for (Arm failed : outcome.failed_arms) {
                if (failed == arm) {
                    ++summary.failed_cells;
                }
            }
            for (const auto& row : outcome.rows) {
                if (row.arm == arm && row.error_count != kFailedCellSentinel) {
                    error_sum += row.error_count;
                    ++row_count;
                }
            }
        }
        if (summary.total_scenarios > 0) {
            summary.converged_fraction =
                static_cast<double>(summary.converged_scenarios) /
                static_cast<double>(summary.total_scenarios);
        }
        if (row_count > 0) {
            summary.mean_error_count = static_cast<double>(error_sum) /
                                       static_cast<double>(row_count);
        }
        (arm == Arm::WithTemplate ? report.with_template
                                  : report.without_template) = summary;
    }

    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const ReportRow& a, const ReportRow& b) {
                         if (a.scenario_id != b.scenario_id) {
                             return a.scenario_id < b.scenario_id;
                         }
                         if (a.arm != b.arm) {
                             return a.arm == Arm::WithTemplate;
                         }
                         return a.iteration < b.iteration;
                     });
    return report;
}

std::vector<Arm> selected_arms(ArmSelection selection) {
    switch (selection) {
        case ArmSelection::WithOnly:
            return {Arm::WithTemplate};
        case ArmSelection::WithoutOnly:
            return {Arm::WithoutTemplate};
        default:
            return {Arm::WithTemplate, Arm::WithoutTemplate};
    }
}

}  // namespace

std::string arm_name(Arm arm) {
    return arm == Arm::WithTemplate ? "with_template" : "without_template";
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path) {
    std::vector<Scenario> scenarios;

    auto add_entry = [&scenarios](const ordered_json& entry,
                                  std::string fallback_id,
                                  const std::string& origin) {
        Scenario scenario =
            scenario_from_entry(entry, std::move(fallback_id), origin);
        if (!scenario.id.empty()) {
            scenarios.push_back(std::move(scenario));
        }
    };

    if (std::filesystem::is_directory(path)) {
        for (const auto& file : std::filesystem::directory_iterator(path)) {
            if (!file.is_regular_file() ||
                file.path().extension() != ".json") {
                continue;
            }
            ordered_json doc = parse_file(file.path());
            std::string stem = file.path().stem().string();
            if (doc.is_array()) {
                int index = 0;
                for (const auto& entry : doc) {
                    add_entry(entry, stem + "_" + std::to_string(index++),
                              file.path().string());
                }
            } else {
                add_entry(doc, stem, file.path().string());
            }
        }
    } else if (std::filesystem::is_regular_file(path)) {
        ordered_json doc = parse_file(path);
        if (!doc.is_array()) {
            throw MalformedScenario("scenario file " + path.string() +
                                    " must hold a JSON array");
        }
        std::string stem = path.stem().string();
        int index = 0;
        for (const auto& entry : doc) {
            add_entry(entry, stem + "_" + std::to_string(index++),
                      path.string());
        }
    } else {
        throw MalformedScenario("scenario path does not exist: " +
                                path.string());
    }

    if (scenarios.empty()) {
        throw EmptyCorpus("no scenario with type \"input\" under " +
                          path.string());
    }
    std::sort(scenarios.begin(), scenarios.end(),
              [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
    return scenarios;
}

AblationReport run_ablation(llm::Backend& backend,
                            const std::vector<Scenario>& scenarios,
                            const EvalConfig& config) {
    if (scenarios.empty()) {
        throw EmptyCorpus("ablation needs at least one scenario");
    }
    std::vector<Arm> arms = selected_arms(config.arms);
    std::vector<ScenarioOutcome> outcomes;
    outcomes.reserve(scenarios.size());
    for (const auto& scenario : scenarios) {
        outcomes.push_back(run_scenario(backend, scenario, arms, config));
    }
    return assemble(outcomes, arms, scenarios.size(),
                    config.pipeline.request.model_id);
}

AblationReport run_ablation(const llm::BackendConfig& backend_config,
                            const std::vector<Scenario>& scenarios,
                            const EvalConfig& config, int jobs) {
    bool deterministic_provider =
        backend_config.provider == llm::Provider::Scripted ||
        backend_config.provider == llm::Provider::Replay;
    if (jobs <= 1 || deterministic_provider) {
        auto backend = llm::make_backend(backend_config);
        return run_ablation(*backend, scenarios, config);
    }

    std::vector<Arm> arms = selected_arms(config.arms);
    std::vector<ScenarioOutcome> outcomes(scenarios.size());
    std::vector<std::thread> workers;
    std::size_t worker_count =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), scenarios.size());
    for (std::size_t w = 0; w < worker_count; ++w) {
        workers.emplace_back([&, w]() {
            auto backend = llm::make_backend(backend_config);
            for (std::size_t i = w; i < scenarios.size(); i += worker_count) {
                outcomes[i] = run_scenario(*backend, scenarios[i], arms, config);
            }
        });
    }
    for (auto& worker : workers) {
        worker.join();
    }
    return assemble(outcomes, arms, scenarios.size(),
                    config.pipeline.request.model_id);
}

std::string report_to_csv(const AblationReport& report) {
    std::ostringstream out;
    out << "scenario_id,arm,iteration,error_count\n";
    for (const auto& row : report.rows) {
        out << row.scenario_id << ',' << arm_name(row.arm) << ','
            << row.iteration << ',' << row.error_count << '\n';
    }
    return out.str();
}

namespace {

ordered_json summary_to_json(const ArmSummary& summary) {
    return ordered_json{
        {"converged_scenarios", summary.converged_scenarios},
        {"total_scenarios", summary.total_scenarios},
        {"converged_fraction", summary.converged_fraction},
        {"mean_error_count", summary.mean_error_count},
        {"failed_cells", summary.failed_cells},
    };
}

ArmSummary summary_from_json(const ordered_json& doc) {
    ArmSummary summary;
    summary.converged_scenarios = doc.at("converged_scenarios").get<int>();
    summary.total_scenarios = doc.at("total_scenarios").get<int>();
    summary.converged_fraction = doc.at("converged_fraction").get<double>();
    summary.mean_error_count = doc.at("mean_error_count").get<double>();
    summary.failed_cells = doc.at("failed_cells").get<int>();
    return summary;
}

}  // namespace

std::string report_to_json(const AblationReport& report) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows) {
        rows.push_back({
            {"scenario_id", row.scenario_id},
            {"arm", arm_name(row.arm)},
            {"iteration", row.iteration},
            {"error_count", row.error_count},
        });
    }
    ordered_json arms_summary = ordered_json::object();
    for (Arm arm : report.arms) {
        arms_summary[arm_name(arm)] = summary_to_json(report.summary_for(arm));
    }
    ordered_json doc{
        {"rows", std::move(rows)},
        {"summary",
         ordered_json{{"arms", std::move(arms_summary)},
                      {"model_id", report.model_id},
                      {"notes", report.notes}}},
    };
    return doc.dump(4) + "\n";
}

AblationReport report_from_json(const std::string& text) {
    ordered_json doc = ordered_json::parse(text);
    AblationReport report;
    for (const auto& row : doc.at("rows")) {
        ReportRow parsed;
        parsed.scenario_id = row.at("scenario_id").get<std::string>();
        parsed.arm = row.at("arm").get<std::string>() == "with_template"
                         ? Arm::WithTemplate
                         : Arm::WithoutTemplate;
        parsed.iteration = row.at("iteration").get<int>();
        parsed.error_count = row.at("error_count").get<int>();
        report.rows.push_back(std::move(parsed));
    }
    const auto& summary = doc.at("summary");
    for (const auto& [name, value] : summary.at("arms").items()) {
        Arm arm =
            name == "with_template" ? Arm::WithTemplate : Arm::WithoutTemplate;
        report.arms.push_back(arm);
        (arm == Arm::WithTemplate ? report.with_template
                                  : report.without_template) =
            summary_from_json(value);
    }
    report.model_id = summary.value("model_id", "");
    for (const auto& note : summary.value("notes", ordered_json::array())) {
        report.notes.push_back(note.get<std::string>());
    }
    return report;
}

void emit_report(const AblationReport& report, ReportFormat format,
                 const std::filesystem::path& out_path) {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write report file: " +
                                 out_path.string());
    }
    out << (format == ReportFormat::Csv ? report_to_csv(report)
                                        : report_to_json(report));
    if (!out) {
        throw std::runtime_error("failed while writing report file: " +
                                 out_path.string());
    }
}

}  // namespace systemp::eval
