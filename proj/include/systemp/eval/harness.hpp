#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "systemp/agents/pipeline.hpp"
#include "systemp/llm/gateway.hpp"

namespace systemp::eval {

struct Scenario {
    // Filename stem (or array-entry id).
    std::string id;
    std::string content;

    bool operator==(const Scenario&) const = default;
};

class MalformedScenario : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class EmptyCorpus : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Arm { WithTemplate, WithoutTemplate };

std::string arm_name(Arm arm);

// Rows with this error count mark a cell that failed to run at all.
inline constexpr int kFailedCellSentinel = -1;

struct ReportRow {
    std::string scenario_id;
    Arm arm = Arm::WithTemplate;
    int iteration = 0;
    int error_count = 0;

    bool operator==(const ReportRow&) const = default;
};

struct ArmSummary {
    int converged_scenarios = 0;
    int total_scenarios = 0;
    double converged_fraction = 0.0;
    // Mean error count over all recorded iterations of the arm, sentinel
    // rows excluded.
    double mean_error_count = 0.0;
    int failed_cells = 0;

    bool operator==(const ArmSummary&) const = default;
};

struct AblationReport {
    std::vector<ReportRow> rows;
    std::vector<Arm> arms;
    ArmSummary with_template;
    ArmSummary without_template;
    std::string model_id;
    std::vector<std::string> notes;

    const ArmSummary& summary_for(Arm arm) const {
        return arm == Arm::WithTemplate ? with_template : without_template;
    }
    bool any_failed_cell() const {
        return with_template.failed_cells > 0 ||
               without_template.failed_cells > 0;
    }

    bool operator==(const AblationReport&) const = default;
};

enum class ArmSelection { Both, WithOnly, WithoutOnly };

struct EvalConfig {
    agents::PipelineConfig pipeline;
    ArmSelection arms = ArmSelection::Both;
};

// Loads scenarios from a directory of .json files or a single .json array
// file; keeps entries with "type": "input" and returns them in
// lexicographic id order. Throws MalformedScenario and EmptyCorpus.
std::vector<Scenario> load_scenarios(const std::filesystem::path& path);

// Runs the ablation grid. Specification extraction runs once per scenario
// and is shared by both arms, so the skeleton stage is the only variable.
// A failing cell becomes a sentinel row plus a note; the run never aborts
// for one cell.
AblationReport run_ablation(llm::Backend& backend,
                            const std::vector<Scenario>& scenarios,
                            const EvalConfig& config);

// Parallel variant: scenarios are distributed over `jobs` workers, each
// owning a backend built from `backend_config`. Scripted and replay
// providers are forced sequential to keep script order deterministic.
AblationReport run_ablation(const llm::BackendConfig& backend_config,
                            const std::vector<Scenario>& scenarios,
                            const EvalConfig& config, int jobs);

enum class ReportFormat { Csv, Json };

std::string report_to_csv(const AblationReport& report);
std::string report_to_json(const AblationReport& report);
AblationReport report_from_json(const std::string& text);

void emit_report(const AblationReport& report, ReportFormat format,
                 const std::filesystem::path& out_path);

}  // namespace systemp::eval
