#include "archon/toml.hpp"

#include "archon/error.hpp"

#include <cctype>
#include <set>
#include <string>

namespace archon {
namespace {

class TomlParser {
public:
    explicit TomlParser(std::string_view text) : s_(text) {}

    nlohmann::json parse() {
        nlohmann::json root = nlohmann::json::object();
        nlohmann::json* table = &root;
        while (true) {
            skip_blank_lines();
            if (at_end()) break;
            if (peek() == '[') {
                table = &open_table(root);
            } else {
                auto key = parse_key();
                skip_ws();
                expect('=');
                skip_ws();
                auto value = parse_value();
                if (table->contains(key)) fail("duplicate key '" + key + "'");
                (*table)[key] = std::move(value);
            }
            end_of_line();
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw config_error("archon.toml:" + std::to_string(line_) + ": " + what);
    }

    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }
    char get() {
        char c = s_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        get();
    }
    void skip_ws() {
        while (!at_end() && (peek() == ' ' || peek() == '\t')) get();
    }
    void skip_comment() {
        if (peek() == '#') {
            while (!at_end() && peek() != '\n') get();
        }
    }
    void skip_blank_lines() {
        while (!at_end()) {
            skip_ws();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') {
                get();
            } else {
                break;
            }
        }
    }
    void end_of_line() {
        skip_ws();
        skip_comment();
        if (peek() == '\r') get();
        if (!at_end() && peek() != '\n') fail("unexpected trailing characters");
    }
    // whitespace, newlines and comments inside arrays
    void skip_array_space() {
        while (!at_end()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                get();
            } else if (c == '#') {
                skip_comment();
            } else {
                break;
            }
        }
    }

    nlohmann::json& open_table(nlohmann::json& root) {
        get();
        if (peek() == '[') fail("arrays of tables are not supported");
        nlohmann::json* t = &root;
        std::string path;
        while (true) {
            skip_ws();
            auto part = parse_key();
            path += (path.empty() ? "" : ".") + part;
            if (t->contains(part) && !(*t)[part].is_object()) fail("'" + path + "' is not a table");
            if (!t->contains(part)) (*t)[part] = nlohmann::json::object();
            t = &(*t)[part];
            skip_ws();
            if (peek() == '.') {
                get();
                continue;
            }
            break;
        }
        expect(']');
        if (!defined_.insert(path).second) fail("table [" + path + "] defined twice");
        return *t;
    }

    std::string parse_key() {
        if (peek() == '"') return parse_basic_string();
        if (peek() == '\'') return parse_literal_string();
        std::string key;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) {
            key.push_back(get());
        }
        if (key.empty()) fail("expected a key");
        return key;
    }

    nlohmann::json parse_value() {
        char c = peek();
        if (c == '"') return parse_basic_string();
        if (c == '\'') return parse_literal_string();
        if (c == '[') return parse_array();
        if (c == '{') fail("inline tables are not supported");
        std::string word;
        while (!at_end() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
               peek() != '#') {
            word.push_back(get());
        }
        if (word == "true") return true;
        if (word == "false") return false;
        std::string digits;
        for (char d : word) {
            if (d != '_') digits.push_back(d);
        }
        if (digits.empty()) fail("expected a value");
        try {
            std::size_t used = 0;
            if (digits.find_first_of(".eE") == std::string::npos || digits.rfind("0x", 0) == 0) {
                auto v = std::stoll(digits, &used, 0);
                if (used == digits.size()) return v;
            } else {
                auto v = std::stod(digits, &used);
                if (used == digits.size()) return v;
            }
        } catch (const std::exception&) {
        }
        fail("invalid value '" + word + "'");
    }

    nlohmann::json parse_array() {
        get();
        nlohmann::json arr = nlohmann::json::array();
        while (true) {
            skip_array_space();
            if (peek() == ']') {
                get();
                return arr;
            }
            if (at_end()) fail("unterminated array");
            arr.push_back(parse_value());
            skip_array_space();
            if (peek() == ',') {
                get();
            } else if (peek() != ']') {
                fail("expected ',' or ']' in array");
            }
        }
    }

    std::string parse_literal_string() {
        get();
        std::string out;
        while (!at_end() && peek() != '\'' && peek() != '\n') out.push_back(get());
        if (peek() != '\'') fail("unterminated string");
        get();
        return out;
    }

    std::string parse_basic_string() {
        get();
        std::string out;
        while (true) {
            if (at_end() || peek() == '\n') fail("unterminated string");
            char c = get();
            if (c == '"') return out;
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            char e = at_end() ? '\0' : get();
            switch (e) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            case 'u': {
                if (pos_ + 4 > s_.size()) fail("bad unicode escape");
                unsigned cp = std::stoul(std::string(s_.substr(pos_, 4)), nullptr, 16);
                pos_ += 4;
                if (cp < 0x80) {
                    out.push_back(static_cast<char>(cp));
                } else if (cp < 0x800) {
                    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                } else {
                    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                }
                break;
            }
            default: fail(std::string("unknown escape '\\") + e + "'");
            }
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::set<std::string> defined_;
};

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return TomlParser(text).parse(); }

}  // namespace archon
