#pragma once

#include "archon/config.hpp"
#include "archon/gate.hpp"
#include "archon/orchestrator.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace archon {

/// Stable process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailed = 1,  // gate failed, run did not finish, replay diverged
    kExitConfig = 2,  // bad configuration, usage or arguments
    kExitInfra = 3,   // I/O, subprocess, provider or lock failure
};

int exit_code_for(const Error& e);

inline const std::vector<std::string>& workspace_dirs() {
    static const std::vector<std::string> dirs{"src", "references", "routes", "ledger", "spec", "checkpoints"};
    return dirs;
}

/// Directory holding `<name>/template/` trees: $ARCHON_TEMPLATES, else the bundled fixtures.
fs::path templates_dir();

/// Creates the workspace skeleton, default config, starter skill and empty spec, then
/// overlays the named template. Refuses a non-empty root unless `force`.
void init_workspace(const fs::path& root, const std::optional<std::string>& template_name, bool force);

std::unique_ptr<Provider> make_provider(const Config& config, const fs::path& root);

struct RunOptions {
    bool replay = false;
    std::optional<Phase> stop_at;
    bool resume = false;
};

/// The `run`/`resume` command: locks the workspace, records the script and a `run-start`
/// checkpoint on first run, and drives the orchestrator.
RunResult run_workspace(const fs::path& root, const RunOptions& options);

struct ReplayResult {
    bool identical = false;
    std::size_t recorded_events = 0;
    std::size_t replayed_events = 0;
    std::optional<std::size_t> first_difference;  // 1-based event index
    fs::path scratch;
};

/// Re-executes the recorded run from its `run-start` checkpoint in a scratch copy and
/// compares the normalized ledgers.
ReplayResult replay_workspace(const fs::path& root, const std::optional<fs::path>& scratch = std::nullopt);

/// Gate on the current workspace; read-only unless `record` is set.
GateVerdict verify_workspace(const fs::path& root, bool record);

/// Copies a guidance document into `routes/guidance/`; returns its relative path.
std::string add_guidance(const fs::path& root, const fs::path& document);

/// Derived status, computed from `ledger/` only.
nlohmann::json workspace_status(const fs::path& root);

/// Entry point shared by the executable and tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace archon
