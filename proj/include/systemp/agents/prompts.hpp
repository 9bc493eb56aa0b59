#pragma once

#include <filesystem>
#include <string>

namespace systemp::agents {

// System prompts for the four agents, plus the writer variant used when
// the template stage is ablated.
struct PromptCatalog {
    std::string specification_generator;
    std::string template_generator;
    std::string writer_with_template;
    std::string writer_without_template;
    std::string parser;

    bool operator==(const PromptCatalog&) const = default;
};

// The embedded catalog shipped with the binary.
const PromptCatalog& default_prompt_catalog();

// Loads the catalog from a directory holding the five files
// specification_generator.txt, template_generator.txt,
// writer_with_template.txt, writer_without_template.txt, parser.txt.
PromptCatalog load_prompt_catalog(const std::filesystem::path& dir);

}  // namespace systemp::agents
