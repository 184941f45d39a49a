#include "archon/agents.hpp"

#include "archon/http.hpp"

#include <algorithm>
#include <cstdlib>

namespace archon {

std::string_view to_string(Role r) {
    switch (r) {
    case Role::plan: return "plan";
    case Role::worker: return "worker";
    case Role::review: return "review";
    }
    return "?";
}

Role role_from_string(std::string_view s) {
    for (auto r : {Role::plan, Role::worker, Role::review}) {
        if (to_string(r) == s) return r;
    }
    throw config_error("unknown role '" + std::string(s) + "'");
}

std::string_view to_string(TurnRole r) {
    switch (r) {
    case TurnRole::system: return "system";
    case TurnRole::agent: return "agent";
    case TurnRole::tool: return "tool";
    }
    return "?";
}

std::string_view to_string(SessionOutcome o) {
    switch (o) {
    case SessionOutcome::completed: return "completed";
    case SessionOutcome::stuck: return "stuck";
    case SessionOutcome::budget_exhausted: return "budget_exhausted";
    case SessionOutcome::aborted: return "aborted";
    }
    return "?";
}

SessionOutcome session_outcome_from_string(std::string_view s) {
    for (auto o : {SessionOutcome::completed, SessionOutcome::stuck, SessionOutcome::budget_exhausted,
                   SessionOutcome::aborted}) {
        if (to_string(o) == s) return o;
    }
    throw config_error("unknown session outcome '" + std::string(s) + "'");
}

std::string turn_text(const Turn& t) {
    std::string s = t.content;
    for (const auto& c : t.tool_calls) s += " " + c.tool + " " + c.arguments.dump();
    return s;
}

const std::set<std::string>& tools_for(Role role) {
    static const std::set<std::string> all(tool_names().begin(), tool_names().end());
    static const std::set<std::string> plan = [] {
        auto s = all;
        s.erase("edit_file");
        return s;
    }();
    static const std::set<std::string> review{"run_check", "search_library", "read_reference", "read_ledger",
                                              "write_summary"};
    switch (role) {
    case Role::plan: return plan;
    case Role::review: return review;
    case Role::worker: return all;
    }
    return review;
}

json to_json(const PlanTask& t) {
    return {{"id", t.id},         {"kind", t.kind},       {"targets", t.targets},
            {"scope", t.scope},   {"guidance", t.guidance}, {"constraints", t.constraints},
            {"budget", t.budget}, {"parallel_group", t.parallel_group}};
}

PlanTask plan_task_from_json(const json& j) {
    PlanTask t;
    t.id = j.value("id", "");
    t.kind = j.value("kind", "prove");
    t.targets = j.value("targets", std::vector<std::string>{});
    t.scope = j.value("scope", std::vector<std::string>{});
    t.guidance = j.value("guidance", "");
    t.constraints = j.value("constraints", "");
    t.budget = j.value("budget", std::size_t{0});
    t.parallel_group = j.value("parallel_group", 0);
    return t;
}

namespace {

Signal signal_from(const json& j) {
    auto s = j.is_string() ? j.get<std::string>() : std::string();
    if (s == "done") return Signal::done;
    if (s == "stuck") return Signal::stuck;
    return Signal::none;
}

std::vector<ToolCall> tool_calls_from(const json& j) {
    std::vector<ToolCall> out;
    if (!j.is_array()) return out;
    for (const auto& c : j) {
        out.push_back({c.at("tool").get<std::string>(), c.value("arguments", json::object())});
    }
    return out;
}

}  // namespace

// ---- scripted ------------------------------------------------------------------------

struct ScriptedProvider::Entry {
    std::string role;
    json match;
    bool repeat = false;
    bool claimed = false;
    json turns;
};

namespace {

class ScriptedContext final : public ProviderContext {
public:
    explicit ScriptedContext(json turns) : turns_(std::move(turns)) {}

    Turn next_turn(const std::vector<Turn>&) override {
        if (!turns_.is_array() || next_ >= turns_.size()) {
            return Turn{TurnRole::agent, "script exhausted", {}, std::nullopt, 0, Signal::stuck};
        }
        const auto& t = turns_[next_];
        if (failures_ < t.value("transport_errors", 0)) {
            ++failures_;
            throw TransportError("scripted transport failure");
        }
        ++next_;
        failures_ = 0;
        Turn turn;
        turn.role = TurnRole::agent;
        turn.content = t.value("content", "");
        turn.tool_calls = tool_calls_from(t.value("tool_calls", json::array()));
        turn.signal = signal_from(t.value("signal", json()));
        return turn;
    }

private:
    json turns_;
    std::size_t next_ = 0;
    int failures_ = 0;
};

bool selector_matches(const json& match, const ContextRequest& req) {
    if (!match.is_object()) return true;
    if (match.contains("kind") && match["kind"].get<std::string>() != req.task.kind) return false;
    if (match.contains("task") && match["task"].get<std::string>() != req.task.id) return false;
    if (match.contains("targets_include")) {
        for (const auto& t : match["targets_include"]) {
            auto id = t.get<std::string>();
            if (std::find(req.task.targets.begin(), req.task.targets.end(), id) == req.task.targets.end()) return false;
        }
    }
    if (match.contains("prompt_contains") &&
        req.system_prompt.find(match["prompt_contains"].get<std::string>()) == std::string::npos) {
        return false;
    }
    return true;
}

}  // namespace

ScriptedProvider::ScriptedProvider(json script) {
    if (!script.is_object()) throw config_error("provider script must be a JSON object");
    informal_ = script.value("informal", json::object());
    for (const auto& s : script.value("sessions", json::array())) {
        auto e = std::make_shared<Entry>();
        e->role = s.at("role").get<std::string>();
        role_from_string(e->role);
        e->match = s.value("match", json::object());
        e->repeat = s.value("repeat", false);
        e->turns = s.value("turns", json::array());
        for (const auto& t : e->turns) {
            for (const auto& c : t.value("tool_calls", json::array())) {
                auto tool = c.at("tool").get<std::string>();
                if (std::find(tool_names().begin(), tool_names().end(), tool) == tool_names().end()) {
                    throw config_error("script names unknown tool '" + tool + "'");
                }
            }
        }
        entries_.push_back(std::move(e));
    }
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_file(const fs::path& path) {
    auto text = try_read_file(path);
    if (!text) throw config_error("cannot read provider script " + path.string());
    try {
        return std::make_unique<ScriptedProvider>(json::parse(*text));
    } catch (const json::exception& e) {
        throw config_error("bad provider script " + path.string() + ": " + e.what());
    }
}

std::unique_ptr<ProviderContext> ScriptedProvider::open_context(const ContextRequest& request) {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    for (auto& e : entries_) {
        if (e->claimed || e->role != to_string(request.role) || !selector_matches(e->match, request)) continue;
        if (!e->repeat) e->claimed = true;
        return std::make_unique<ScriptedContext>(e->turns);
    }
    return std::make_unique<ScriptedContext>(json::array());
}

std::string ScriptedProvider::ask_informal(const std::string& question, const std::string&) {
    std::lock_guard lock(mutex_);
    if (informal_.contains(question)) return informal_[question].get<std::string>();
    for (const auto& [key, answer] : informal_.items()) {
        if (!key.empty() && question.find(key) != std::string::npos) return answer.get<std::string>();
    }
    return "No informal argument is available for this question.";
}

std::vector<ContextRequest> ScriptedProvider::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

// ---- network ---------------------------------------------------------------------------

namespace {

json tool_schema(const std::string& name) {
    static const std::map<std::string, std::string> descriptions{
        {"run_check", "Check the project and report diagnostics for the task's files."},
        {"search_library", "Search the statement corpus. Arguments: query, k."},
        {"ask_informal", "Ask the informal mathematician. Arguments: question, tier."},
        {"read_reference", "Read a document from references/. Arguments: name."},
        {"record_route", "Record a candidate proof route. Arguments: obligation, text."},
        {"edit_file", "Edit a file in scope. Arguments: path and content, or path and replace {old, new}."},
        {"read_ledger", "Read recent session summaries. Arguments: limit."},
        {"write_summary", "Finish the session. Arguments: summary, outcome, tasks, revise_decomposition."},
    };
    return {{"name", name}, {"description", descriptions.at(name)}};
}

json message_of(const Turn& t) {
    json m{{"role", std::string(to_string(t.role))}, {"content", t.content}};
    if (!t.tool_calls.empty()) {
        json calls = json::array();
        for (const auto& c : t.tool_calls) calls.push_back({{"tool", c.tool}, {"arguments", c.arguments}});
        m["tool_calls"] = calls;
    }
    if (t.result) m["result"] = {{"tool", t.result->tool}, {"ok", t.result->ok}, {"payload", t.result->payload}};
    return m;
}

class HttpContext final : public ProviderContext {
public:
    HttpContext(const HttpProvider& provider, Role role) : provider_(provider), role_(role) {}

    Turn next_turn(const std::vector<Turn>& history) override {
        json messages = json::array();
        for (const auto& t : history) messages.push_back(message_of(t));
        json tools = json::array();
        for (const auto& name : tools_for(role_)) tools.push_back(tool_schema(name));
        json body{{"messages", messages}, {"tools", tools}, {"max_tokens", provider_.config().max_tokens}};
        if (!provider_.config().model.empty()) body["model"] = provider_.config().model;

        auto reply = provider_.post(body);
        Turn turn;
        turn.role = TurnRole::agent;
        turn.content = reply.value("content", "");
        turn.tool_calls = tool_calls_from(reply.value("tool_calls", json::array()));
        turn.signal = signal_from(reply.value("stop", json()));
        if (turn.tool_calls.empty() && turn.signal == Signal::none) turn.signal = Signal::done;
        return turn;
    }

private:
    const HttpProvider& provider_;
    Role role_;
};

}  // namespace

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw config_error("network provider needs an endpoint");
}

json HttpProvider::post(const json& body) const {
    std::map<std::string, std::string> headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) headers["Authorization"] = std::string("Bearer ") + key;
    }
    HttpResponse res;
    try {
        res = http_post_json(config_.endpoint, body.dump(), headers, config_.timeout);
    } catch (const Error& e) {
        throw TransportError(e.what());
    }
    if (res.status < 200 || res.status >= 300) {
        throw TransportError("provider returned HTTP " + std::to_string(res.status));
    }
    try {
        return json::parse(res.body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("provider reply is not JSON: ") + e.what());
    }
}

std::unique_ptr<ProviderContext> HttpProvider::open_context(const ContextRequest& request) {
    return std::make_unique<HttpContext>(*this, request.role);
}

std::string HttpProvider::ask_informal(const std::string& question, const std::string& tier) {
    json body{{"messages",
               json::array({{{"role", "system"}, {"content", "You are an informal mathematician. Answer in prose."}},
                            {{"role", "user"}, {"content", question}}})},
              {"tools", json::array()},
              {"max_tokens", config_.max_tokens},
              {"tier", tier}};
    if (!config_.model.empty()) body["model"] = config_.model;
    return post(body).value("content", "");
}

}  // namespace archon
