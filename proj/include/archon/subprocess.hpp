#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

namespace archon {

struct ProcessResult {
    int exit_code = -1;  // -1 when killed by a signal or timeout
    bool timed_out = false;
    std::string output;  // interleaved stdout and stderr
};

/// Runs `command` through /bin/sh in `cwd`. On timeout the whole process group is killed.
ProcessResult run_command(const std::string& command, const std::filesystem::path& cwd,
                          std::optional<std::chrono::milliseconds> timeout);

/// Single-quotes `arg` for /bin/sh.
std::string shell_quote(const std::string& arg);

}  // namespace archon
