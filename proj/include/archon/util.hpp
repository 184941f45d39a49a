#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace archon {

namespace fs = std::filesystem;

/// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

std::string read_file(const fs::path& path);
std::optional<std::string> try_read_file(const fs::path& path);

/// Writes via a sibling temp file and rename, so readers never observe a torn file.
void write_file_atomic(const fs::path& path, std::string_view content);

/// Recursively copies `from` into `to`, creating `to`. Existing files are overwritten.
void copy_tree(const fs::path& from, const fs::path& to);

/// Lexically normalizes `rel` and checks that it stays inside the root.
/// Returns the generic-form relative path, or nullopt on escape or absolute input.
std::optional<std::string> confine_relative(std::string_view rel);

std::vector<std::string> split_words(std::string_view text);
std::string trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

/// Budget estimator: word count x 1.3, rounded up.
std::size_t estimate_tokens(std::string_view text);

}  // namespace archon
