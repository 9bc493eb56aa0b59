#include <doctest.h>

#include "support/helpers.hpp"
#include "systemp/sysml/ast.hpp"
#include "systemp/sysml/parser.hpp"
#include "systemp/sysml/printer.hpp"

using namespace systemp;
using systemp::testing::ModelGenerator;

TEST_CASE("pretty_print of an empty model is empty text") {
    CHECK(sysml::pretty_print(sysml::SysmlModel{}) == "");
}

TEST_CASE("pretty_print renders a terse part with canonical layout") {
    sysml::PackageDecl pkg;
    pkg.name = "P";
    pkg.members.push_back(sysml::Member{sysml::PartDecl{"x", {}, false}});
    sysml::SysmlModel model;
    model.packages.push_back(pkg);

    CHECK(sysml::pretty_print(model) == "package P {\n    part x;\n}\n");
}

TEST_CASE("pretty_print is deterministic") {
    ModelGenerator gen(7);
    for (int i = 0; i < 20; ++i) {
        sysml::SysmlModel model = gen.model();
        CHECK(sysml::pretty_print(model) == sysml::pretty_print(model));
    }
}

TEST_CASE("pretty_print emits docs, attributes, and constraints") {
    sysml::RequirementDecl req;
    req.name = "Material";
    req.doc = "Use aluminum.";
    req.members.push_back(
        sysml::Member{sysml::AttributeDecl{"mass", "ISQ::mass", "3 kg"}});
    req.members.push_back(
        sysml::Member{sysml::ConstraintDecl{true, std::nullopt, "mass <= 3"}});
    sysml::PackageDecl pkg;
    pkg.name = "Fork";
    pkg.members.push_back(sysml::Member{req});
    sysml::SysmlModel model;
    model.packages.push_back(pkg);

    std::string text = sysml::pretty_print(model);
    CHECK(text == "package Fork {\n"
                  "    requirement Material {\n"
                  "        doc /* Use aluminum. */\n"
                  "        attribute mass : ISQ::mass = 3 kg;\n"
                  "        require constraint { mass <= 3 }\n"
                  "    }\n"
                  "}\n");
}

TEST_CASE("pretty_print never leaves trailing whitespace") {
    ModelGenerator gen(11);
    for (int i = 0; i < 50; ++i) {
        std::string text = sysml::pretty_print(gen.model());
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) {
                CHECK(!std::isspace(static_cast<unsigned char>(line.back())));
            }
        }
        if (!text.empty()) {
            CHECK(text.back() == '\n');
        }
    }
}

TEST_CASE("count_elements on an empty model is all zeros") {
    CHECK(sysml::count_elements(sysml::SysmlModel{}) == sysml::ElementCounts{});
}

TEST_CASE("count_elements on the reference skeleton counts two requirements") {
    std::string text =
        testing::read_file(testing::data_dir() / "fixtures" /
                           "bikefork_skeleton.sysml");
    sysml::ParseReport report = sysml::parse(text);
    REQUIRE(report.model.has_value());
    sysml::ElementCounts counts = sysml::count_elements(*report.model);
    CHECK(counts.packages == 1);
    CHECK(counts.requirements == 2);
    CHECK(counts.parts == 0);
    CHECK(counts.attributes == 0);
    CHECK(counts.constraints == 0);
    CHECK(counts.actions == 0);
}

TEST_CASE("count_elements recurses into part bodies") {
    sysml::ParseReport report = sysml::parse(
        "package package_name { part part_name { attribute attribute_name; } }");
    REQUIRE(report.model.has_value());
    sysml::ElementCounts counts = sysml::count_elements(*report.model);
    CHECK(counts.packages == 1);
    CHECK(counts.parts == 1);
    CHECK(counts.attributes == 1);
}

TEST_CASE("is_valid_identifier follows the letter-then-alnum rule") {
    CHECK(sysml::is_valid_identifier("Material"));
    CHECK(sysml::is_valid_identifier("_1InchPivot"));
    CHECK(sysml::is_valid_identifier("a_b_3"));
    CHECK(!sysml::is_valid_identifier(""));
    CHECK(!sysml::is_valid_identifier("1abc"));
    CHECK(!sysml::is_valid_identifier("a-b"));
    CHECK(!sysml::is_valid_identifier("a b"));
}

TEST_CASE("the reference skeleton survives a print round-trip") {
    std::string original = testing::read_file(
        testing::data_dir() / "fixtures" / "bikefork_skeleton.sysml");
    sysml::ParseReport first = sysml::parse(original);
    REQUIRE(first.error_count == 0);
    std::string printed = sysml::pretty_print(*first.model);
    sysml::ParseReport second = sysml::parse(printed);
    REQUIRE(second.error_count == 0);
    CHECK(*second.model == *first.model);
    CHECK(testing::normalize_ws(printed) == testing::normalize_ws(original));
}

TEST_CASE("round-trip: parse(pretty_print(m)) reconstructs m") {
    ModelGenerator gen(0xC0FFEE);
    for (int i = 0; i < 200; ++i) {
        sysml::SysmlModel model = gen.model();
        std::string text = sysml::pretty_print(model);
        sysml::ParseReport report = sysml::parse(text);
        REQUIRE_MESSAGE(report.error_count == 0, "failed on:\n", text);
        REQUIRE(report.model.has_value());
        CHECK_MESSAGE(*report.model == model, "mismatch on:\n", text);
    }
}
