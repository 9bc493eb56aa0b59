#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "systemp/sysml/diagnostics.hpp"

namespace systemp::sysml {

enum class TokenKind {
    Keyword,
    Identifier,
    Punctuation,
    Number,
    String,
    DocComment,
    EndOfInput,
};

struct Token {
    TokenKind kind = TokenKind::EndOfInput;
    // Raw source text of the token. For doc comments this spans from the
    // `doc` keyword through the closing `*/`.
    std::string lexeme;
    int line = 1;
    int column = 1;
    // Doc comments only: the comment interior with surrounding whitespace
    // trimmed.
    std::string payload;

    bool is_keyword(std::string_view kw) const {
        return kind == TokenKind::Keyword && lexeme == kw;
    }
    bool is_punct(std::string_view p) const {
        return kind == TokenKind::Punctuation && lexeme == p;
    }
};

struct LexResult {
    // Always terminated by a single EndOfInput token.
    std::vector<Token> tokens;
    std::vector<Diagnostic> diagnostics;
};

// Tokenizes the SysML v2 textual subset. Never fails: lexical problems
// (stray characters, unterminated comments or strings) become diagnostics
// and tokenization continues.
LexResult tokenize(std::string_view text);

}  // namespace systemp::sysml
