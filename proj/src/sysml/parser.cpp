#include "systemp/sysml/parser.hpp"

#include <algorithm>
#include <cassert>

#include "systemp/sysml/lexer.hpp"

namespace systemp::sysml {

namespace {

// Bounds body recursion on adversarial input; exceeding it is one diagnostic.
constexpr int kMaxNestingDepth = 64;

// Which member kinds a body accepts.
enum class BodyContext { Package, PartOrAction, Requirement };

const char* expected_member_description(BodyContext ctx) {
    switch (ctx) {
        case BodyContext::Requirement:
            return "'attribute', 'constraint', or 'doc'";
        default:
            return "a member declaration";
    }
}

bool is_opener(const Token& t) {
    return t.is_punct("{") || t.is_punct("(") || t.is_punct("[");
}

bool is_closer(const Token& t) {
    return t.is_punct("}") || t.is_punct(")") || t.is_punct("]");
}

std::string matching_closer(std::string_view opener) {
    if (opener == "{") return "}";
    if (opener == "(") return ")";
    return "]";
}

class Parser {
   public:
    explicit Parser(std::string_view text) {
        auto lexed = tokenize(text);
        tokens_ = std::move(lexed.tokens);
        diagnostics_ = std::move(lexed.diagnostics);
    }

    ParseReport run() {
        SysmlModel model;
        while (!at_end()) {
            if (cur().is_keyword("package")) {
                model.packages.push_back(parse_package(1));
            } else {
                error_unexpected_token("'package'");
                recover_top_level();
            }
        }

        std::stable_sort(diagnostics_.begin(), diagnostics_.end(),
                         [](const Diagnostic& a, const Diagnostic& b) {
                             return a.line != b.line ? a.line < b.line
                                                     : a.column < b.column;
                         });
        ParseReport report;
        report.diagnostics = std::move(diagnostics_);
        report.error_count = static_cast<int>(
            std::count_if(report.diagnostics.begin(), report.diagnostics.end(),
                          [](const Diagnostic& d) {
                              return d.severity == Severity::Error;
                          }));
        if (report.error_count == 0) {
            report.model = std::move(model);
        }
        return report;
    }

   private:
    std::vector<Token> tokens_;
    std::vector<Diagnostic> diagnostics_;
    std::size_t pos_ = 0;

    const Token& cur() const { return tokens_[pos_]; }

    bool at_end() const { return cur().kind == TokenKind::EndOfInput; }

    void advance() {
        if (!at_end()) {
            ++pos_;
        }
    }

    void error_at(const Token& where, std::string message,
                  std::optional<std::string> expected = std::nullopt,
                  std::optional<std::string> found = std::nullopt) {
        Diagnostic d;
        d.severity = Severity::Error;
        d.message = std::move(message);
        d.line = where.line;
        d.column = where.column;
        d.expected = std::move(expected);
        d.found = std::move(found);
        diagnostics_.push_back(std::move(d));
    }

    void error_unexpected_token(std::string expected) {
        error_at(cur(), "Unexpected token '" + cur().lexeme + "'",
                 std::move(expected), cur().lexeme);
    }

    void error_expected(std::string expected) {
        std::string message =
            "Expected " + expected + ", found '" + cur().lexeme + "'";
        error_at(cur(), std::move(message), std::move(expected), cur().lexeme);
    }

    static bool starts_member(const Token& t) {
        if (t.kind == TokenKind::DocComment) {
            return true;
        }
        return t.is_keyword("package") || t.is_keyword("part") ||
               t.is_keyword("attribute") || t.is_keyword("requirement") ||
               t.is_keyword("constraint") || t.is_keyword("require") ||
               t.is_keyword("action");
    }

    // Skips to the next `;` (consumed) or `}` (left for the enclosing body)
    // at the current nesting level, so one broken member yields one
    // diagnostic and the next member parses independently. A member-leading
    // keyword also stops the skip, but never on the first token: the caller
    // may be positioned on the very token it just reported, and recovery
    // must make progress.
    void sync_member() {
        int depth = 0;
        bool first = true;
        while (!at_end()) {
            const Token& t = cur();
            if (depth == 0) {
                if (t.is_punct(";")) {
                    advance();
                    return;
                }
                if (t.is_punct("}")) {
                    return;
                }
                if (!first && starts_member(t)) {
                    return;
                }
            }
            if (is_opener(t)) {
                ++depth;
            } else if (is_closer(t) && depth > 0) {
                --depth;
            }
            first = false;
            advance();
        }
    }

    // Top level knows only package declarations, so resynchronize there.
    void recover_top_level() {
        int depth = 0;
        while (!at_end()) {
            const Token& t = cur();
            if (depth == 0 && t.is_keyword("package")) {
                return;
            }
            if (is_opener(t)) {
                ++depth;
            } else if (is_closer(t) && depth > 0) {
                --depth;
            }
            advance();
        }
    }

    // Consumes a balanced token run up to and including the `}` matching an
    // already-consumed `{`. Used when the nesting cap trips.
    void skip_balanced_body() {
        int depth = 1;
        while (!at_end() && depth > 0) {
            if (is_opener(cur())) {
                ++depth;
            } else if (is_closer(cur())) {
                --depth;
            }
            advance();
        }
    }

    std::optional<std::string> expect_identifier() {
        if (cur().kind == TokenKind::Identifier) {
            std::string name = cur().lexeme;
            advance();
            return name;
        }
        error_expected("identifier");
        return std::nullopt;
    }

    void append_doc(std::optional<std::string>& slot, const std::string& text) {
        if (!slot) {
            slot = text;
        } else {
            *slot += "\n" + text;
        }
    }

    PackageDecl parse_package(int depth) {
        assert(cur().is_keyword("package"));
        advance();
        PackageDecl pkg;
        if (auto name = expect_identifier()) {
            pkg.name = std::move(*name);
        } else {
            sync_member();
            return pkg;
        }
        if (!cur().is_punct("{")) {
            error_expected("'{'");
            sync_member();
            return pkg;
        }
        advance();
        parse_body(pkg.members, &pkg.doc, BodyContext::Package, depth);
        return pkg;
    }

    // Body loop shared by package, part, and action; `{` already consumed.
    void parse_body(std::vector<Member>& members,
                    std::optional<std::string>* doc_slot, BodyContext ctx,
                    int depth) {
        if (depth > kMaxNestingDepth) {
            error_at(cur(), "Maximum nesting depth (64) exceeded");
            skip_balanced_body();
            return;
        }
        while (true) {
            if (at_end()) {
                error_expected("'}'");
                return;
            }
            if (cur().is_punct("}")) {
                advance();
                return;
            }
            parse_member(members, doc_slot, ctx, depth);
        }
    }

    void parse_member(std::vector<Member>& members,
                      std::optional<std::string>* doc_slot, BodyContext ctx,
                      int depth) {
        const Token& t = cur();

        if (t.kind == TokenKind::DocComment) {
            // Absorbed into the enclosing declaration's doc; part and
            // action bodies accept the syntax but have no doc slot.
            if (doc_slot != nullptr) {
                append_doc(*doc_slot, t.payload);
            }
            advance();
            return;
        }
        if (t.is_keyword("doc")) {
            error_expected("a doc comment after 'doc'");
            advance();
            sync_member();
            return;
        }

        if (ctx == BodyContext::Requirement) {
            if (t.is_keyword("attribute")) {
                if (auto attr = parse_attribute()) {
                    members.push_back(Member{std::move(*attr)});
                }
                return;
            }
            if (t.is_keyword("require") || t.is_keyword("constraint")) {
                if (auto con = parse_constraint()) {
                    members.push_back(Member{std::move(*con)});
                }
                return;
            }
            error_unexpected_token(expected_member_description(ctx));
            sync_member();
            return;
        }

        if (t.is_keyword("package")) {
            members.push_back(Member{parse_package(depth + 1)});
            return;
        }
        if (t.is_keyword("part")) {
            if (auto part = parse_part_like<PartDecl>("part", depth)) {
                members.push_back(Member{std::move(*part)});
            }
            return;
        }
        if (t.is_keyword("action")) {
            if (auto action = parse_part_like<ActionDecl>("action", depth)) {
                members.push_back(Member{std::move(*action)});
            }
            return;
        }
        if (t.is_keyword("attribute")) {
            if (auto attr = parse_attribute()) {
                members.push_back(Member{std::move(*attr)});
            }
            return;
        }
        if (t.is_keyword("requirement")) {
            if (auto req = parse_requirement(depth)) {
                members.push_back(Member{std::move(*req)});
            }
            return;
        }
        if (t.is_keyword("require") || t.is_keyword("constraint")) {
            if (auto con = parse_constraint()) {
                members.push_back(Member{std::move(*con)});
            }
            return;
        }

        error_unexpected_token(expected_member_description(ctx));
        sync_member();
    }

    template <typename Decl>
    std::optional<Decl> parse_part_like(const char* keyword, int depth) {
        assert(cur().is_keyword(keyword));
        (void)keyword;
        advance();
        Decl decl;
        if (auto name = expect_identifier()) {
            decl.name = std::move(*name);
        } else {
            sync_member();
            return std::nullopt;
        }
        if (cur().is_punct(";")) {
            advance();
            decl.body_present = false;
            return decl;
        }
        if (cur().is_punct("{")) {
            advance();
            decl.body_present = true;
            parse_body(decl.members, nullptr, BodyContext::PartOrAction,
                       depth + 1);
            return decl;
        }
        error_expected("';' or '{'");
        sync_member();
        return std::nullopt;
    }

    std::optional<RequirementDecl> parse_requirement(int depth) {
        assert(cur().is_keyword("requirement"));
        advance();
        RequirementDecl req;
        if (auto name = expect_identifier()) {
            req.name = std::move(*name);
        } else {
            sync_member();
            return std::nullopt;
        }
        if (cur().is_punct(";")) {
            advance();
            return req;
        }
        if (!cur().is_punct("{")) {
            error_expected("';' or '{'");
            sync_member();
            return std::nullopt;
        }
        advance();
        if (depth + 1 > kMaxNestingDepth) {
            error_at(cur(), "Maximum nesting depth (64) exceeded");
            skip_balanced_body();
            return req;
        }
        while (true) {
            if (at_end()) {
                error_expected("'}'");
                return req;
            }
            if (cur().is_punct("}")) {
                advance();
                return req;
            }
            parse_member(req.members, &req.doc, BodyContext::Requirement,
                         depth + 1);
        }
    }

    std::optional<AttributeDecl> parse_attribute() {
        assert(cur().is_keyword("attribute"));
        advance();
        AttributeDecl attr;
        if (auto name = expect_identifier()) {
            attr.name = std::move(*name);
        } else {
            sync_member();
            return std::nullopt;
        }
        if (cur().is_punct(":")) {
            advance();
            if (auto qname = parse_qualified_name()) {
                attr.type_ref = std::move(*qname);
            } else {
                sync_member();
                return std::nullopt;
            }
        }
        if (cur().is_punct("=")) {
            advance();
            if (auto value = scan_expression_until_semicolon()) {
                attr.value_expr = std::move(*value);
            } else {
                return std::nullopt;
            }
            return attr;
        }
        if (cur().is_punct(";")) {
            advance();
            return attr;
        }
        error_expected("';'");
        sync_member();
        return std::nullopt;
    }

    std::optional<std::string> parse_qualified_name() {
        auto first = expect_identifier();
        if (!first) {
            return std::nullopt;
        }
        std::string qname = std::move(*first);
        while (cur().is_punct("::") || cur().is_punct(".")) {
            std::string sep = cur().lexeme;
            advance();
            auto next = expect_identifier();
            if (!next) {
                return std::nullopt;
            }
            qname += sep + *next;
        }
        return qname;
    }

    std::optional<ConstraintDecl> parse_constraint() {
        ConstraintDecl con;
        if (cur().is_keyword("require")) {
            con.required = true;
            advance();
        }
        if (!cur().is_keyword("constraint")) {
            error_expected("'constraint' after 'require'");
            sync_member();
            return std::nullopt;
        }
        advance();
        if (cur().kind == TokenKind::Identifier) {
            con.name = cur().lexeme;
            advance();
        }
        if (cur().is_punct(";")) {
            advance();
            return con;
        }
        if (cur().is_punct("{")) {
            advance();
            if (auto formula = scan_constraint_formula()) {
                con.formula = std::move(*formula);
                return con;
            }
            return std::nullopt;
        }
        error_expected("';' or '{'");
        sync_member();
        return std::nullopt;
    }

    // Expression payloads are opaque: validated for bracket balance only,
    // stored as lexemes joined by single spaces.
    std::optional<std::string> scan_expression_until_semicolon() {
        std::vector<std::string> open_stack;
        std::string text;
        while (true) {
            const Token& t = cur();
            if (at_end()) {
                error_expected("';'");
                return std::nullopt;
            }
            if (open_stack.empty() && t.is_punct(";")) {
                advance();
                return text;
            }
            if (is_opener(t)) {
                open_stack.push_back(t.lexeme);
            } else if (is_closer(t)) {
                if (!open_stack.empty() &&
                    matching_closer(open_stack.back()) == t.lexeme) {
                    open_stack.pop_back();
                } else if (open_stack.empty() && t.is_punct("}")) {
                    error_expected("';'");
                    return std::nullopt;
                } else {
                    std::string want = open_stack.empty()
                                           ? std::string("';'")
                                           : "'" + matching_closer(
                                                       open_stack.back()) +
                                                 "'";
                    error_expected(want + " in expression");
                    sync_member();
                    return std::nullopt;
                }
            }
            if (!text.empty()) {
                text += ' ';
            }
            text += t.lexeme;
            advance();
        }
    }

    // Inside `constraint ... { ... }`; the opening `{` is already consumed
    // and the matching `}` terminates the formula.
    std::optional<std::string> scan_constraint_formula() {
        std::vector<std::string> open_stack;
        std::string text;
        while (true) {
            const Token& t = cur();
            if (at_end()) {
                error_expected("'}'");
                return std::nullopt;
            }
            if (open_stack.empty() && t.is_punct("}")) {
                advance();
                return text;
            }
            if (is_opener(t)) {
                open_stack.push_back(t.lexeme);
            } else if (is_closer(t)) {
                if (!open_stack.empty() &&
                    matching_closer(open_stack.back()) == t.lexeme) {
                    open_stack.pop_back();
                } else {
                    std::string want =
                        open_stack.empty()
                            ? std::string("'}'")
                            : "'" + matching_closer(open_stack.back()) + "'";
                    error_expected(want + " in constraint body");
                    sync_member();
                    return std::nullopt;
                }
            }
            if (!text.empty()) {
                text += ' ';
            }
            text += t.lexeme;
            advance();
        }
    }
};

}  // namespace

ParseReport parse(std::string_view text) {
    return Parser(text).run();
}

ParseReport check(std::string_view text) {
    return parse(text);
}

}  // namespace systemp::sysml
