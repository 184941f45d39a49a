#pragma once

#include <nlohmann/json.hpp>

#include <string_view>

namespace archon {

/// Parses the TOML subset used by `archon.toml` into JSON: `[table]` and `[a.b]` headers,
/// bare or quoted keys, basic and literal strings, integers, floats, booleans, and
/// (possibly multi-line) arrays of those. Duplicate keys and anything else are config errors.
nlohmann::json parse_toml(std::string_view text);

}  // namespace archon
