#pragma once

#include "archon/agents.hpp"
#include "archon/checker.hpp"
#include "archon/gate.hpp"

#include <optional>
#include <string>

namespace archon {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kConfigFile = "archon.toml";

/// Worker scheduling within a wave. The sequential modes exist so that interleavings
/// can be compared directly.
enum class ScheduleMode { parallel, forward, reverse };
std::string_view to_string(ScheduleMode m);

struct ProviderSettings {
    std::string kind = "scripted";  // scripted | http
    std::string script = "script.json";
    HttpProviderConfig http;
    int retry_limit = 2;
};

struct BudgetSettings {
    std::size_t worker_tokens = 4096;
    std::size_t plan_tokens = 2048;
    std::size_t review_tokens = 2048;
    std::optional<std::size_t> max_turns;
    std::size_t stall_threshold = 3;
    std::size_t review_window = 6;
    std::size_t iteration_cap = 50;
    std::size_t parallelism = 4;
};

struct PathSettings {
    std::string spec = "spec/Challenge.mck";
    std::string corpus = "references/corpus.jsonl";
    std::string informal_proof = "references/informal_proof.md";
    std::string skills = ".archon/skills";
};

struct RunSettings {
    bool replay = false;
    bool quality_pass = true;
    bool review_agent = false;
    ScheduleMode schedule = ScheduleMode::parallel;
};

struct Config {
    int schema_version = kSchemaVersion;
    CheckerConfig checker;
    ProviderSettings provider;
    GatePolicy policy = default_policy(Dialect::toy);
    BudgetSettings budgets;
    PathSettings paths;
    RunSettings run;
};

/// Parses `archon.toml` text. Unknown sections or keys and wrong value types are config errors.
Config parse_config(std::string_view text);

/// Loads `<root>/archon.toml`; a missing file is a config error.
Config load_config(const fs::path& root);

/// The commented default configuration written by `archon init`.
std::string default_config_text();

nlohmann::json to_json(const Config& c);

}  // namespace archon
