#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace archon {

enum class Dialect { toy, external };

std::string_view to_string(Dialect d);
Dialect dialect_from_string(std::string_view s);

struct Position {
    int line = 0;  // 1-based
    int col = 0;   // 1-based byte column

    auto operator<=>(const Position&) const = default;
};

struct Span {
    Position start;
    Position end;  // exclusive

    auto operator<=>(const Span&) const = default;
};

enum class TokenKind { identifier, number, string, op };

struct Token {
    TokenKind kind = TokenKind::op;
    std::string text;
    Span span;

    bool is(std::string_view t) const { return kind != TokenKind::string && text == t; }
    bool operator==(const Token&) const = default;
};

struct LexError {
    Position at;
    std::string message;
};

struct LexResult {
    std::vector<Token> tokens;  // comments are dropped, strings kept as single tokens
    std::vector<LexError> errors;
};

/// Tokenizes source text. Both dialects share `--` line comments, nestable
/// `/- ... -/` block comments and double-quoted strings; the external dialect
/// additionally admits non-ASCII letters in identifiers.
LexResult lex(std::string_view text, Dialect dialect);

}  // namespace archon
