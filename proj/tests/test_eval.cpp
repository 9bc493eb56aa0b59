#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "support/helpers.hpp"
#include "systemp/eval/harness.hpp"

using namespace systemp;

namespace {

agents::PipelineConfig scripted_pipeline_config() {
    agents::PipelineConfig config;
    config.k_examples = 0;
    config.request.model_id = "scripted";
    return config;
}

llm::ScriptedBackend fixture_backend() {
    return llm::ScriptedBackend(
        llm::load_script(testing::data_dir() / "fixtures" / "eval_script.json"));
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("load_scenarios reads the bundled corpus in lexicographic order") {
    std::vector<eval::Scenario> scenarios =
        eval::load_scenarios(testing::data_dir() / "scenarios");
    REQUIRE(scenarios.size() == 5);
    CHECK(scenarios[0].id == "drivetrain");
    CHECK(scenarios[1].id == "electric_bike");
    CHECK(scenarios[2].id == "fork");
    CHECK(scenarios[3].id == "mountain_bike");
    CHECK(scenarios[4].id == "tire");
    CHECK(scenarios[2].content.find("1\" 1/8 Aheadset pivot") !=
          std::string::npos);
}

TEST_CASE("load_scenarios filters non-input entries into EmptyCorpus") {
    auto dir = temp_file("systemp_scenarios_note");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "note.json") << R"({"type":"note"})";
    CHECK_THROWS_AS(eval::load_scenarios(dir), eval::EmptyCorpus);
    std::filesystem::remove_all(dir);
}

TEST_CASE("load_scenarios accepts a single array file") {
    auto file = temp_file("systemp_scenarios_array.json");
    std::ofstream(file) << R"([
        {"type":"input","id":"b","content":"second"},
        {"type":"input","id":"a","content":"first"},
        {"type":"note","content":"ignored"}
    ])";
    std::vector<eval::Scenario> scenarios = eval::load_scenarios(file);
    REQUIRE(scenarios.size() == 2);
    CHECK(scenarios[0].id == "a");
    CHECK(scenarios[1].id == "b");
    std::filesystem::remove(file);
}

TEST_CASE("load_scenarios rejects malformed entries and missing paths") {
    auto dir = temp_file("systemp_scenarios_bad");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bad.json") << R"({"type":"input"})";
    CHECK_THROWS_AS(eval::load_scenarios(dir), eval::MalformedScenario);
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(eval::load_scenarios(temp_file("systemp_no_such_dir")),
                    eval::MalformedScenario);
}

TEST_CASE("the bundled fixture reproduces the reported convergence split") {
    std::vector<eval::Scenario> scenarios =
        eval::load_scenarios(testing::data_dir() / "scenarios");
    llm::ScriptedBackend backend = fixture_backend();
    eval::EvalConfig config;
    config.pipeline = scripted_pipeline_config();
    eval::AblationReport report =
        eval::run_ablation(backend, scenarios, config);

    CHECK(report.with_template.converged_scenarios == 4);
    CHECK(report.with_template.total_scenarios == 5);
    CHECK(report.with_template.converged_fraction == doctest::Approx(0.8));
    CHECK(report.without_template.converged_scenarios == 1);
    CHECK(report.without_template.converged_fraction == doctest::Approx(0.2));
    CHECK(report.with_template.failed_cells == 0);
    CHECK(report.without_template.failed_cells == 0);
    CHECK(backend.remaining() == 0);

    // Rows are contiguous from 1 within every cell.
    std::string scenario;
    eval::Arm arm = eval::Arm::WithTemplate;
    int expected_iteration = 1;
    for (const auto& row : report.rows) {
        if (row.scenario_id != scenario || row.arm != arm) {
            scenario = row.scenario_id;
            arm = row.arm;
            expected_iteration = 1;
        }
        CHECK(row.iteration == expected_iteration);
        ++expected_iteration;
    }

    // Summary fractions are recomputable from rows.
    for (eval::Arm check_arm :
         {eval::Arm::WithTemplate, eval::Arm::WithoutTemplate}) {
        int converged = 0;
        for (const auto& row : report.rows) {
            if (row.arm == check_arm && row.error_count == 0) {
                ++converged;
            }
        }
        CHECK(converged == report.summary_for(check_arm).converged_scenarios);
    }
}

TEST_CASE("with-template mean error is lower on the fixture trajectories") {
    std::vector<eval::Scenario> scenarios =
        eval::load_scenarios(testing::data_dir() / "scenarios");
    llm::ScriptedBackend backend = fixture_backend();
    eval::EvalConfig config;
    config.pipeline = scripted_pipeline_config();
    eval::AblationReport report =
        eval::run_ablation(backend, scenarios, config);
    CHECK(report.with_template.mean_error_count <
          report.without_template.mean_error_count);
    CHECK(report.model_id == "scripted");
}

TEST_CASE("both arms share one specification extraction per scenario") {
    eval::Scenario scenario{"solo", "one scenario"};
    std::string spec_json = testing::read_file(
        testing::data_dir() / "fixtures" / "specs" / "fork.json");
    llm::ScriptedBackend backend(testing::make_script({
        {"specification", spec_json},
        {"writer", testing::fenced(testing::sysml_text_with_errors(0))},
        {"writer", testing::fenced(testing::sysml_text_with_errors(0))},
    }));
    eval::EvalConfig config;
    config.pipeline = scripted_pipeline_config();
    eval::AblationReport report =
        eval::run_ablation(backend, {scenario}, config);
    CHECK(backend.remaining() == 0);  // exactly one specification entry used
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].arm == eval::Arm::WithTemplate);
    CHECK(report.rows[0].iteration == 1);
    CHECK(report.rows[0].error_count == 0);
    CHECK(report.rows[1].arm == eval::Arm::WithoutTemplate);
    CHECK(report.rows[1].error_count == 0);
}

TEST_CASE("a faulted cell is sentinel-marked and the rest completes") {
    std::string spec_json = testing::read_file(
        testing::data_dir() / "fixtures" / "specs" / "fork.json");
    llm::Script script;
    script.entries.push_back({"specification", spec_json, ""});
    script.entries.push_back(
        {"writer", testing::fenced(testing::sysml_text_with_errors(0)), ""});
    script.entries.push_back({"writer", "", "auth"});  // without arm faults
    script.entries.push_back({"specification", spec_json, ""});
    script.entries.push_back(
        {"writer", testing::fenced(testing::sysml_text_with_errors(0)), ""});
    script.entries.push_back(
        {"writer", testing::fenced(testing::sysml_text_with_errors(0)), ""});
    llm::ScriptedBackend backend(std::move(script));

    eval::EvalConfig config;
    config.pipeline = scripted_pipeline_config();
    eval::AblationReport report = eval::run_ablation(
        backend, {{"alpha", "first"}, {"beta", "second"}}, config);

    CHECK(report.without_template.failed_cells == 1);
    CHECK(report.any_failed_cell());
    REQUIRE(report.notes.size() == 1);
    CHECK(report.notes[0].find("alpha/without_template") == 0);
    bool saw_sentinel = false;
    for (const auto& row : report.rows) {
        if (row.scenario_id == "alpha" &&
            row.arm == eval::Arm::WithoutTemplate) {
            CHECK(row.error_count == eval::kFailedCellSentinel);
            saw_sentinel = true;
        }
    }
    CHECK(saw_sentinel);
    CHECK(report.with_template.converged_scenarios == 2);
    CHECK(report.without_template.converged_scenarios == 1);
}

TEST_CASE("csv emission is stable and re-parsable by hand") {
    std::vector<eval::Scenario> scenarios =
        eval::load_scenarios(testing::data_dir() / "scenarios");
    llm::ScriptedBackend backend = fixture_backend();
    eval::EvalConfig config;
    config.pipeline = scripted_pipeline_config();
    eval::AblationReport report =
        eval::run_ablation(backend, scenarios, config);

    std::string csv = eval::report_to_csv(report);
    CHECK(csv.rfind("scenario_id,arm,iteration,error_count\n", 0) == 0);
    std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == report.rows.size() + 1);
    CHECK(csv.find("drivetrain,with_template,1,2") != std::string::npos);
    CHECK(csv.find("fork,without_template,5,0") != std::string::npos);
}

TEST_CASE("json reports round-trip structurally") {
    std::vector<eval::Scenario> scenarios =
        eval::load_scenarios(testing::data_dir() / "scenarios");
    llm::ScriptedBackend backend = fixture_backend();
    eval::EvalConfig config;
    config.pipeline = scripted_pipeline_config();
    eval::AblationReport report =
        eval::run_ablation(backend, scenarios, config);

    eval::AblationReport reloaded =
        eval::report_from_json(eval::report_to_json(report));
    CHECK(reloaded == report);
}

TEST_CASE("emit_report writes the requested format") {
    eval::AblationReport report;
    report.arms = {eval::Arm::WithTemplate};
    report.rows = {{"s", eval::Arm::WithTemplate, 1, 2},
                   {"s", eval::Arm::WithTemplate, 2, 0}};
    report.with_template = {1, 1, 1.0, 1.0, 0};
    auto csv_path = temp_file("systemp_report.csv");
    eval::emit_report(report, eval::ReportFormat::Csv, csv_path);
    std::string csv = testing::read_file(csv_path);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    auto json_path = temp_file("systemp_report.json");
    eval::emit_report(report, eval::ReportFormat::Json, json_path);
    CHECK(eval::report_from_json(testing::read_file(json_path)) == report);
    std::filesystem::remove(csv_path);
    std::filesystem::remove(json_path);
}

TEST_CASE("parallel eval over an HTTP provider matches the sequential rows") {
    setenv("SYSTEMP_TEST_KEY", "sk-test", 1);
    std::string spec_json = testing::read_file(
        testing::data_dir() / "fixtures" / "specs" / "fork.json");
    std::string sysml_reply =
        testing::fenced(testing::sysml_text_with_errors(0));

    // One endpoint serves both agents: the system prompt tells them apart.
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                            httplib::Response& res) {
        nlohmann::json body = nlohmann::json::parse(req.body);
        std::string system = body["messages"][0]["content"];
        bool is_extractor =
            system.find("extractor-generator") != std::string::npos;
        nlohmann::json doc = {
            {"choices",
             {{{"message",
                {{"role", "assistant"},
                 {"content", is_extractor ? spec_json : sysml_reply}}},
               {"finish_reason", "stop"}}}},
        };
        res.set_content(doc.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    llm::BackendConfig backend_config;
    backend_config.provider = llm::Provider::OpenAiCompatible;
    backend_config.base_url = "http://127.0.0.1:" + std::to_string(port);
    backend_config.api_key_env = "SYSTEMP_TEST_KEY";
    backend_config.model_id = "test-model";
    backend_config.retry_backoff_ms = 1;

    std::vector<eval::Scenario> scenarios = {
        {"a", "first"}, {"b", "second"}, {"c", "third"}};
    eval::EvalConfig config;
    config.pipeline = scripted_pipeline_config();
    config.pipeline.request.model_id = "test-model";

    eval::AblationReport sequential =
        eval::run_ablation(backend_config, scenarios, config, 1);
    eval::AblationReport parallel =
        eval::run_ablation(backend_config, scenarios, config, 2);
    CHECK(parallel.rows == sequential.rows);
    CHECK(parallel.with_template.converged_scenarios == 3);
    CHECK(parallel.without_template.converged_scenarios == 3);
    CHECK(parallel.rows.size() == 6);

    server.stop();
    listener.join();
}

TEST_CASE("arm selection restricts the grid") {
    std::string spec_json = testing::read_file(
        testing::data_dir() / "fixtures" / "specs" / "fork.json");
    llm::ScriptedBackend backend(testing::make_script({
        {"specification", spec_json},
        {"writer", testing::fenced(testing::sysml_text_with_errors(0))},
    }));
    eval::EvalConfig config;
    config.pipeline = scripted_pipeline_config();
    config.arms = eval::ArmSelection::WithOnly;
    eval::AblationReport report =
        eval::run_ablation(backend, {{"solo", "text"}}, config);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].arm == eval::Arm::WithTemplate);
    CHECK(report.arms == std::vector<eval::Arm>{eval::Arm::WithTemplate});
    CHECK(backend.remaining() == 0);
}
