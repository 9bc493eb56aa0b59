#include "systemp/sysml/lexer.hpp"

#include <array>
#include <cctype>

namespace systemp::sysml {

namespace {

constexpr std::array<std::string_view, 8> kKeywords = {
    "package", "part",      "attribute", "requirement",
    "constraint", "require", "action",    "doc",
};

bool is_keyword(std::string_view word) {
    for (auto kw : kKeywords) {
        if (word == kw) {
            return true;
        }
    }
    return false;
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

constexpr std::string_view kSinglePuncts = "{}()[];:=,.<>+-*/%!&|^~?";

constexpr std::array<std::string_view, 8> kMultiPuncts = {
    "::", "==", "!=", "<=", ">=", "->", "&&", "||",
};

std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
        ++begin;
    }
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
        --end;
    }
    return std::string(text.substr(begin, end - begin));
}

class Lexer {
   public:
    explicit Lexer(std::string_view text) : text_(text) {}

    LexResult run() {
        while (!at_end()) {
            skip_trivia();
            if (at_end()) {
                break;
            }
            lex_token();
        }
        Token eof;
        eof.kind = TokenKind::EndOfInput;
        eof.lexeme = "<end of input>";
        eof.line = line_;
        eof.column = column_;
        result_.tokens.push_back(std::move(eof));
        return std::move(result_);
    }

   private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    LexResult result_;

    bool at_end() const { return pos_ >= text_.size(); }

    char peek(std::size_t offset = 0) const {
        return pos_ + offset < text_.size() ? text_[pos_ + offset] : '\0';
    }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    void error(std::string message, int line, int column) {
        Diagnostic d;
        d.severity = Severity::Error;
        d.message = std::move(message);
        d.line = line;
        d.column = column;
        result_.diagnostics.push_back(std::move(d));
    }

    void skip_trivia() {
        while (!at_end()) {
            char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (!at_end() && peek() != '\n') {
                    advance();
                }
            } else if (c == '/' && peek(1) == '*') {
                skip_block_comment();
            } else {
                break;
            }
        }
    }

    // Consumes `/* ... */`; reports and stops at end of input when the
    // terminator is missing. Returns the interior text.
    std::string consume_block_comment() {
        int open_line = line_;
        int open_column = column_;
        advance();  // '/'
        advance();  // '*'
        std::size_t body_begin = pos_;
        while (!at_end()) {
            if (peek() == '*' && peek(1) == '/') {
                std::string_view body = text_.substr(body_begin, pos_ - body_begin);
                advance();
                advance();
                return std::string(body);
            }
            advance();
        }
        error("Unterminated block comment", open_line, open_column);
        return std::string(text_.substr(body_begin));
    }

    void skip_block_comment() { consume_block_comment(); }

    void lex_token() {
        int start_line = line_;
        int start_column = column_;
        std::size_t start_pos = pos_;
        char c = peek();

        if (is_ident_start(c)) {
            while (!at_end() && is_ident_char(peek())) {
                advance();
            }
            std::string word(text_.substr(start_pos, pos_ - start_pos));
            if (word == "doc") {
                lex_doc(start_line, start_column, start_pos);
                return;
            }
            Token t;
            t.kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier;
            t.lexeme = std::move(word);
            t.line = start_line;
            t.column = start_column;
            result_.tokens.push_back(std::move(t));
            return;
        }

        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
                advance();
            }
            if (peek() == '.' &&
                std::isdigit(static_cast<unsigned char>(peek(1)))) {
                advance();
                while (!at_end() &&
                       std::isdigit(static_cast<unsigned char>(peek()))) {
                    advance();
                }
            }
            push_token(TokenKind::Number, start_pos, start_line, start_column);
            return;
        }

        if (c == '"') {
            lex_string(start_line, start_column, start_pos);
            return;
        }

        for (auto mp : kMultiPuncts) {
            if (text_.substr(pos_, mp.size()) == mp) {
                advance();
                advance();
                push_token(TokenKind::Punctuation, start_pos, start_line,
                           start_column);
                return;
            }
        }

        if (kSinglePuncts.find(c) != std::string_view::npos) {
            advance();
            push_token(TokenKind::Punctuation, start_pos, start_line,
                       start_column);
            return;
        }

        advance();
        error(std::string("unexpected character '") + c + "'", start_line,
              start_column);
    }

    // `doc` followed by a block comment fuses into one DocComment token;
    // a bare `doc` stays a keyword and the parser reports the mismatch.
    void lex_doc(int start_line, int start_column, std::size_t start_pos) {
        std::size_t lookahead = pos_;
        while (lookahead < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[lookahead]))) {
            ++lookahead;
        }
        bool comment_follows = lookahead + 1 < text_.size() &&
                               text_[lookahead] == '/' &&
                               text_[lookahead + 1] == '*';
        if (!comment_follows) {
            Token t;
            t.kind = TokenKind::Keyword;
            t.lexeme = "doc";
            t.line = start_line;
            t.column = start_column;
            result_.tokens.push_back(std::move(t));
            return;
        }
        while (pos_ < lookahead) {
            advance();
        }
        std::string body = consume_block_comment();
        Token t;
        t.kind = TokenKind::DocComment;
        t.lexeme = std::string(text_.substr(start_pos, pos_ - start_pos));
        t.line = start_line;
        t.column = start_column;
        t.payload = trim(body);
        result_.tokens.push_back(std::move(t));
    }

    void lex_string(int start_line, int start_column, std::size_t start_pos) {
        advance();  // opening quote
        while (!at_end() && peek() != '"' && peek() != '\n') {
            if (peek() == '\\' && pos_ + 1 < text_.size()) {
                advance();
            }
            advance();
        }
        if (peek() == '"') {
            advance();
        } else {
            error("Unterminated string literal", start_line, start_column);
        }
        push_token(TokenKind::String, start_pos, start_line, start_column);
    }

    void push_token(TokenKind kind, std::size_t start_pos, int start_line,
                    int start_column) {
        Token t;
        t.kind = kind;
        t.lexeme = std::string(text_.substr(start_pos, pos_ - start_pos));
        t.line = start_line;
        t.column = start_column;
        result_.tokens.push_back(std::move(t));
    }
};

}  // namespace

LexResult tokenize(std::string_view text) {
    return Lexer(text).run();
}

}  // namespace systemp::sysml
