#pragma once

#include <cctype>
#include <deque>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "systemp/llm/gateway.hpp"
#include "systemp/spec/specification.hpp"
#include "systemp/sysml/ast.hpp"

namespace systemp::testing {

inline std::filesystem::path data_dir() {
    return std::filesystem::path(SYSTEMP_DATA_DIR);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(static_cast<bool>(in), "cannot open ", path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Collapses every whitespace run to a single space and trims the ends.
inline std::string normalize_ws(const std::string& text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) {
                out += ' ';
            }
            out += c;
            pending_space = false;
        }
    }
    return out;
}

inline std::string fenced(const std::string& payload) {
    return "'''\n" + payload + "\n'''";
}

// SysML text whose parse yields exactly `errors` diagnostics: each
// `alias ...;` member is one independently verified single-error seed.
inline std::string sysml_text_with_errors(int errors,
                                          const std::string& package = "Demo") {
    std::ostringstream out;
    out << "package " << package << " {\n";
    out << "    part ok;\n";
    for (int i = 0; i < errors; ++i) {
        out << "    alias e" << i << ";\n";
    }
    out << "}\n";
    return out.str();
}

// Agent-agnostic FIFO backend that records every request it sees.
class CapturingBackend : public llm::Backend {
   public:
    explicit CapturingBackend(std::vector<std::string> replies) {
        for (auto& reply : replies) {
            replies_.push_back(std::move(reply));
        }
    }

    llm::ChatResponse complete(const llm::ChatRequest& request) override {
        request.validate();
        requests.push_back(request);
        if (replies_.empty()) {
            throw llm::ScriptExhausted("capturing backend out of replies");
        }
        llm::ChatResponse response;
        response.content = std::move(replies_.front());
        replies_.pop_front();
        return response;
    }

    std::vector<llm::ChatRequest> requests;

   private:
    std::deque<std::string> replies_;
};

inline llm::Script make_script(
    const std::vector<std::pair<std::string, std::string>>& entries) {
    llm::Script script;
    for (const auto& [agent, content] : entries) {
        script.entries.push_back({agent, content, ""});
    }
    return script;
}

// Random model generator for the round-trip property. All produced models
// satisfy the AST invariants (valid identifiers, balanced canonical
// expressions, trim-stable doc text).
class ModelGenerator {
   public:
    explicit ModelGenerator(std::uint32_t seed) : rng_(seed) {}

    sysml::SysmlModel model() {
        sysml::SysmlModel m;
        int packages = pick(0, 3);
        for (int i = 0; i < packages; ++i) {
            m.packages.push_back(package(1));
        }
        return m;
    }

    // Section names are unique by construction: the document shape is an
    // ordered map, so a valid specification can never carry duplicates.
    spec::StructuredSpecification specification() {
        spec::StructuredSpecification s;
        s.package_name = raw_name();
        int attributes = pick(0, 3);
        for (int i = 0; i < attributes; ++i) {
            s.attributes.push_back({unique_name(s.attributes), sentence()});
        }
        int constraints = pick(0, 2);
        for (int i = 0; i < constraints; ++i) {
            s.constraints.push_back({unique_name(s.constraints), sentence()});
        }
        int requirements = pick(0, 6);
        for (int i = 0; i < requirements; ++i) {
            s.requirements.push_back({unique_name(s.requirements), sentence()});
        }
        return s;
    }

    sysml::PackageDecl package(int depth) {
        sysml::PackageDecl pkg;
        pkg.name = identifier();
        if (chance(3)) {
            pkg.doc = doc_text();
        }
        int members = depth >= 4 ? pick(0, 2) : pick(0, 4);
        for (int i = 0; i < members; ++i) {
            pkg.members.push_back(member(depth + 1));
        }
        return pkg;
    }

    int pick(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng_);
    }

   private:
    std::mt19937 rng_;

    bool chance(int one_in) { return pick(1, one_in) == 1; }

    std::string identifier() {
        static const char* kStems[] = {"frame", "wheel",  "fork", "battery",
                                       "drive", "saddle", "brake", "pivot",
                                       "mass",  "width",  "travel", "cog"};
        std::string name = kStems[pick(0, 11)];
        if (chance(2)) {
            name += "_" + std::to_string(pick(0, 99));
        }
        if (chance(4)) {
            name[0] = static_cast<char>(
                std::toupper(static_cast<unsigned char>(name[0])));
        }
        return name;
    }

    std::string raw_name() {
        std::string name = identifier();
        switch (pick(0, 3)) {
            case 0:
                return name + " " + identifier();
            case 1:
                return std::to_string(pick(0, 9)) + " " + name;
            case 2:
                return name + "-" + identifier();
            default:
                return name;
        }
    }

    std::string unique_name(const std::vector<spec::SpecEntry>& taken) {
        std::string name = raw_name();
        for (int salt = 0;; ++salt) {
            std::string candidate =
                salt == 0 ? name : name + " " + std::to_string(salt);
            bool clash = false;
            for (const auto& entry : taken) {
                if (entry.name == candidate) {
                    clash = true;
                    break;
                }
            }
            if (!clash) {
                return candidate;
            }
        }
    }

    std::string word() {
        static const char* kWords[] = {"aluminum", "steel",   "should", "be",
                                       "the",      "support", "between", "made",
                                       "of",       "with",    "rated",  "for"};
        return kWords[pick(0, 11)];
    }

    std::string sentence() {
        std::string text = word();
        int words = pick(1, 8);
        for (int i = 0; i < words; ++i) {
            text += " " + word();
        }
        return text + ".";
    }

    std::string doc_text() {
        std::string text = word();
        int words = pick(1, 6);
        for (int i = 0; i < words; ++i) {
            text += (chance(5) ? "\n" : " ") + word();
        }
        return text;
    }

    std::string expression(int depth) {
        static const char* kOps[] = {"+", "-", "*", "<", ">", "<=", ">=", "=="};
        std::string text = operand(depth);
        int terms = pick(0, 2);
        for (int i = 0; i < terms; ++i) {
            text += std::string(" ") + kOps[pick(0, 7)] + " " + operand(depth);
        }
        return text;
    }

    std::string operand(int depth) {
        switch (pick(0, depth < 2 ? 4 : 3)) {
            case 0:
                return identifier();
            case 1:
                return std::to_string(pick(0, 500));
            case 2:
                return std::to_string(pick(0, 9)) + "." +
                       std::to_string(pick(1, 99));
            case 3:
                return "\"" + word() + "\"";
            default:
                return "( " + expression(depth + 1) + " )";
        }
    }

    std::string qualified_name() {
        std::string name = identifier();
        int segments = pick(0, 2);
        for (int i = 0; i < segments; ++i) {
            name += "::" + identifier();
        }
        return name;
    }

    sysml::AttributeDecl attribute() {
        sysml::AttributeDecl attr;
        attr.name = identifier();
        if (chance(3)) {
            attr.type_ref = qualified_name();
        }
        if (chance(2)) {
            attr.value_expr = expression(0);
        }
        return attr;
    }

    sysml::ConstraintDecl constraint() {
        sysml::ConstraintDecl con;
        con.required = chance(2);
        if (chance(2)) {
            con.name = identifier();
        }
        switch (pick(0, 2)) {
            case 0:
                break;  // terse form
            case 1:
                con.formula = "";
                break;
            default:
                con.formula = expression(0);
        }
        return con;
    }

    sysml::RequirementDecl requirement() {
        sysml::RequirementDecl req;
        req.name = identifier();
        if (chance(2)) {
            req.doc = doc_text();
        }
        int members = pick(0, 3);
        for (int i = 0; i < members; ++i) {
            if (chance(2)) {
                req.members.push_back(sysml::Member{attribute()});
            } else {
                req.members.push_back(sysml::Member{constraint()});
            }
        }
        return req;
    }

    template <typename Decl>
    Decl part_like(int depth) {
        Decl decl;
        decl.name = identifier();
        decl.body_present = chance(2);
        if (decl.body_present && depth < 4) {
            int members = pick(0, 3);
            for (int i = 0; i < members; ++i) {
                decl.members.push_back(member(depth + 1));
            }
        }
        return decl;
    }

    sysml::Member member(int depth) {
        int kind = pick(0, depth >= 4 ? 3 : 5);
        switch (kind) {
            case 0:
                return sysml::Member{attribute()};
            case 1:
                return sysml::Member{requirement()};
            case 2:
                return sysml::Member{constraint()};
            case 3:
                return sysml::Member{part_like<sysml::PartDecl>(depth)};
            case 4:
                return sysml::Member{part_like<sysml::ActionDecl>(depth)};
            default:
                return sysml::Member{package(depth)};
        }
    }
};

}  // namespace systemp::testing
