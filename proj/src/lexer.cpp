#include "archon/lexer.hpp"

#include "archon/error.hpp"

#include <array>
#include <cctype>

namespace archon {

std::string_view to_string(Dialect d) { return d == Dialect::toy ? "toy" : "external"; }

Dialect dialect_from_string(std::string_view s) {
    if (s == "toy") return Dialect::toy;
    if (s == "external") return Dialect::external;
    throw config_error("unknown dialect '" + std::string(s) + "'");
}

namespace {

constexpr std::array<std::string_view, 11> kMultiOps = {":=", "->", "<-", "<=", ">=", "=>", "==", "!=", "&&", "||", "::"};

bool ascii_ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }

bool ascii_ident_char(unsigned char c, Dialect d) {
    if (std::isalnum(c) || c == '_' || c == '\'' || c == '.') return true;
    return d == Dialect::external && (c == '!' || c == '?');
}

std::size_t utf8_length(unsigned char lead) {
    if (lead >= 0xF0) return 4;
    if (lead >= 0xE0) return 3;
    if (lead >= 0xC0) return 2;
    return 1;
}

// Decodes the codepoint at `p` (assumes well-formed UTF-8; malformed bytes decode as themselves).
char32_t decode(std::string_view s, std::size_t p, std::size_t len) {
    auto b = [&](std::size_t i) { return static_cast<unsigned char>(s[p + i]); };
    if (p + len > s.size()) return b(0);
    switch (len) {
    case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
    case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
    case 4: return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) | ((b(2) & 0x3F) << 6) | (b(3) & 0x3F);
    default: return b(0);
    }
}

// Letter-like codepoints (Greek, Latin supplements, letterlike symbols, subscripts)
// continue identifiers in the external dialect; arrows and math operators do not.
bool unicode_letter(char32_t cp) {
    if (cp >= 0x00C0 && cp <= 0x024F) return true;
    if (cp >= 0x0370 && cp <= 0x03FF && cp != 0x03BB && cp != 0x03A0 && cp != 0x03A3) return true;  // λ Π Σ are binders
    if (cp >= 0x1D00 && cp <= 0x1DBF) return true;
    if (cp >= 0x2070 && cp <= 0x209F) return true;
    if (cp >= 0x2100 && cp <= 0x214F) return true;
    if (cp >= 0x1D400 && cp <= 0x1D7FF) return true;
    return false;
}

class Lexer {
public:
    Lexer(std::string_view text, Dialect dialect) : s_(text), d_(dialect) {}

    LexResult run() {
        while (p_ < s_.size()) {
            unsigned char c = s_[p_];
            if (c == '\n') { advance(1); continue; }
            if (std::isspace(c)) { advance(1); continue; }
            if (at("--")) { skip_line(); continue; }
            if (at("/-")) { skip_block(); continue; }
            if (c == '"') { string_lit(); continue; }
            if (std::isdigit(c)) { number(); continue; }
            if (ascii_ident_start(c) || (c >= 0x80 && d_ == Dialect::external && letter_at(p_))) {
                ident();
                continue;
            }
            op();
        }
        return std::move(out_);
    }

private:
    bool at(std::string_view lit) const { return s_.substr(p_, lit.size()) == lit; }

    Position pos() const { return {line_, col_}; }

    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n && p_ < s_.size(); ++i, ++p_) {
            if (s_[p_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
        }
    }

    bool letter_at(std::size_t p) const {
        auto len = utf8_length(static_cast<unsigned char>(s_[p]));
        return unicode_letter(decode(s_, p, len));
    }

    void skip_line() {
        while (p_ < s_.size() && s_[p_] != '\n') advance(1);
    }

    void skip_block() {
        Position start = pos();
        int depth = 0;
        while (p_ < s_.size()) {
            if (at("/-")) {
                ++depth;
                advance(2);
            } else if (at("-/")) {
                advance(2);
                if (--depth == 0) return;
            } else {
                advance(1);
            }
        }
        out_.errors.push_back({start, "unterminated block comment"});
    }

    void string_lit() {
        Position start = pos();
        std::size_t b = p_;
        advance(1);
        while (p_ < s_.size() && s_[p_] != '"') {
            if (s_[p_] == '\\') advance(1);
            advance(1);
        }
        if (p_ >= s_.size()) {
            out_.errors.push_back({start, "unterminated string literal"});
        } else {
            advance(1);
        }
        emit(TokenKind::string, b, start);
    }

    void number() {
        Position start = pos();
        std::size_t b = p_;
        while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) advance(1);
        emit(TokenKind::number, b, start);
    }

    void ident() {
        Position start = pos();
        std::size_t b = p_;
        while (p_ < s_.size()) {
            unsigned char c = s_[p_];
            if (c < 0x80) {
                if (!ascii_ident_char(c, d_)) break;
                advance(1);
            } else if (d_ == Dialect::external && letter_at(p_)) {
                advance(utf8_length(c));
            } else {
                break;
            }
        }
        // A trailing dot belongs to the surrounding syntax, not the name.
        while (p_ - b > 1 && s_[p_ - 1] == '.') {
            --p_;
            --col_;
        }
        emit(TokenKind::identifier, b, start);
    }

    void op() {
        Position start = pos();
        std::size_t b = p_;
        for (auto m : kMultiOps) {
            if (at(m)) {
                advance(m.size());
                emit(TokenKind::op, b, start);
                return;
            }
        }
        advance(utf8_length(static_cast<unsigned char>(s_[p_])));
        emit(TokenKind::op, b, start);
    }

    void emit(TokenKind kind, std::size_t begin, Position start) {
        out_.tokens.push_back({kind, std::string(s_.substr(begin, p_ - begin)), {start, pos()}});
    }

    std::string_view s_;
    Dialect d_;
    std::size_t p_ = 0;
    int line_ = 1;
    int col_ = 1;
    LexResult out_;
};

}  // namespace

LexResult lex(std::string_view text, Dialect dialect) { return Lexer(text, dialect).run(); }

}  // namespace archon
