#pragma once

#include "archon/checker.hpp"
#include "archon/clock.hpp"
#include "archon/error.hpp"
#include "archon/library.hpp"
#include "archon/workspace.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace archon {

using nlohmann::json;

enum class Role { plan, worker, review };
std::string_view to_string(Role r);
Role role_from_string(std::string_view s);

enum class TurnRole { system, agent, tool };
std::string_view to_string(TurnRole r);

enum class SessionOutcome { completed, stuck, budget_exhausted, aborted };
std::string_view to_string(SessionOutcome o);
SessionOutcome session_outcome_from_string(std::string_view s);

/// How an agent turn ends the session when it carries no tool calls.
enum class Signal { none, done, stuck };

struct ToolCall {
    std::string tool;
    json arguments = json::object();

    bool operator==(const ToolCall&) const = default;
};

struct ToolResult {
    std::string tool;
    bool ok = true;
    json payload = json::object();

    bool operator==(const ToolResult&) const = default;
};

struct Turn {
    TurnRole role = TurnRole::agent;
    std::string content;
    std::vector<ToolCall> tool_calls;  // agent turns only
    std::optional<ToolResult> result;  // tool turns only
    std::size_t token_estimate = 0;
    Signal signal = Signal::none;

    bool operator==(const Turn&) const = default;
};

/// Text that token estimates are computed over.
std::string turn_text(const Turn& t);

inline const std::vector<std::string>& tool_names() {
    static const std::vector<std::string> names{"run_check",    "search_library", "ask_informal", "read_reference",
                                                "record_route", "edit_file",      "read_ledger",  "write_summary"};
    return names;
}

/// Tools a role may call. Plan has everything except edit_file; Review is read-only.
const std::set<std::string>& tools_for(Role role);

/// Unit of work handed to a session.
struct PlanTask {
    std::string id;
    std::string kind = "prove";  // scaffold | prove | revision | polish | plan | review
    std::vector<std::string> targets;
    std::vector<std::string> scope;  // file paths, or directory prefixes ending in '/'
    std::string guidance;
    std::string constraints;
    std::size_t budget = 0;
    int parallel_group = 0;

    bool operator==(const PlanTask&) const = default;
};

json to_json(const PlanTask& t);
PlanTask plan_task_from_json(const json& j);

struct Budget {
    std::size_t tokens = 4096;
    std::optional<std::size_t> max_turns;  // agent turns
};

// ---- skills --------------------------------------------------------------------

enum class SkillScope { global, project };

struct SkillDoc {
    std::string name;
    std::string trigger;
    std::string body;
    SkillScope scope = SkillScope::global;
    std::set<std::string> roles;  // empty: every role
};

/// Parses a markdown skill with a `---` delimited header of `key: value` lines
/// (name, trigger, optional comma-separated roles).
SkillDoc parse_skill(std::string_view text, SkillScope scope);

const std::vector<SkillDoc>& builtin_skills();

/// Built-in skills, then every `*.md` under `dir` (per-project), shadowing by name. Sorted by name.
std::vector<SkillDoc> load_skills(const std::optional<fs::path>& project_dir);

std::vector<SkillDoc> skills_for(const std::vector<SkillDoc>& skills, Role role);

// ---- providers -------------------------------------------------------------------

/// Retryable provider failure (network, 5xx, injected fault).
class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error(ErrorKind::infrastructure, what) {}
};

struct ContextRequest {
    std::string session;
    Role role = Role::worker;
    std::string system_prompt;
    PlanTask task;
};

class ProviderContext {
public:
    virtual ~ProviderContext() = default;
    virtual Turn next_turn(const std::vector<Turn>& history) = 0;
    virtual void close() {}
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::unique_ptr<ProviderContext> open_context(const ContextRequest& request) = 0;
    /// One lightweight informal call; `tier` selects a deeper model where the provider has one.
    virtual std::string ask_informal(const std::string& question, const std::string& tier) = 0;
};

/// Replays a JSON script. Each session entry is claimed by the first context whose role
/// and task match its selector; entries without `repeat` are claimed once.
///
///   {"informal": {"<question substring>": "<answer>"},
///    "sessions": [{"role": "worker", "match": {"kind": "prove", "targets_include": ["id"]},
///                  "repeat": false,
///                  "turns": [{"content": "...", "tool_calls": [{"tool": "...", "arguments": {}}],
///                             "signal": "done|stuck", "transport_errors": 0}]}]}
class ScriptedProvider final : public Provider {
public:
    explicit ScriptedProvider(json script);
    static std::unique_ptr<ScriptedProvider> from_file(const fs::path& path);

    std::unique_ptr<ProviderContext> open_context(const ContextRequest& request) override;
    std::string ask_informal(const std::string& question, const std::string& tier) override;

    /// Every context request seen so far, in order.
    std::vector<ContextRequest> requests() const;

private:
    struct Entry;
    mutable std::mutex mutex_;
    json informal_;
    std::vector<std::shared_ptr<Entry>> entries_;
    std::vector<ContextRequest> requests_;
};

struct HttpProviderConfig {
    std::string endpoint;
    std::string model;
    std::string api_key_env;  // name of the environment variable holding the bearer token
    std::size_t max_tokens = 1024;
    std::chrono::milliseconds timeout{60'000};
};

/// Network provider. POSTs `{model, messages, tools, max_tokens}` and expects
/// `{content, tool_calls: [{tool, arguments}], stop}` back.
class HttpProvider final : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config);

    std::unique_ptr<ProviderContext> open_context(const ContextRequest& request) override;
    std::string ask_informal(const std::string& question, const std::string& tier) override;

    json post(const json& body) const;
    const HttpProviderConfig& config() const { return config_; }

private:
    HttpProviderConfig config_;
};

// ---- tools -----------------------------------------------------------------------

/// Handles shared by every session of a run.
struct ToolEnv {
    Workspace* workspace = nullptr;
    CheckerConfig checker;
    const StatementIndex* index = nullptr;
    Provider* informal = nullptr;
    Clock* clock = nullptr;
    /// Recent ledger summaries, most recent last.
    std::function<json(std::size_t limit)> read_ledger;
};

/// Per-session mutable state seen by the tools.
struct SessionScope {
    std::string session;
    Role role = Role::worker;
    PlanTask task;
    std::vector<MutationToken> tokens;
    std::optional<json> summary;  // arguments of the write_summary call
    std::set<std::string> edited;
    std::size_t route_count = 0;
};

bool in_scope(const PlanTask& task, std::string_view path);

ToolResult dispatch_tool(const ToolCall& call, SessionScope& scope, ToolEnv& env);

// ---- sessions ----------------------------------------------------------------------

struct SessionRequest {
    std::string id;
    Role role = Role::worker;
    PlanTask task;
    std::vector<SkillDoc> skills;
    std::string materials;  // documents the task references, already rendered
    Budget budget;
    int retry_limit = 2;
};

struct SessionRecord {
    std::string id;
    Role role = Role::worker;
    PlanTask task;
    std::vector<Turn> turns;
    SessionOutcome outcome = SessionOutcome::stuck;
    std::string summary;
    std::string started;
    std::string ended;
    std::size_t tool_calls = 0;
    json output = json::object();  // write_summary arguments beyond the summary text
    std::set<std::string> edited;

    std::size_t tokens() const;
    bool operator==(const SessionRecord&) const = default;
};

json to_json(const SessionRecord& r);

/// Role prompt + applicable skills + task + materials: the whole initial context.
std::string build_system_prompt(const SessionRequest& request);

/// A session whose provider context is open but which has not taken a turn yet.
struct OpenSession {
    SessionRequest request;
    std::string system_prompt;
    std::unique_ptr<ProviderContext> context;
};

OpenSession open_session(SessionRequest request, Provider& provider);
SessionRecord drive_session(OpenSession session, ToolEnv& env);

/// open_session + drive_session.
SessionRecord run_session(SessionRequest request, Provider& provider, ToolEnv& env);

}  // namespace archon
