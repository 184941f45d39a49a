#include "archon/agents.hpp"

#include <sstream>

namespace archon {

namespace {

const char* role_prompt(Role role) {
    switch (role) {
    case Role::plan:
        return "You are the Plan agent. Study the open obligations, their dependency groups and the latest review, "
               "then call write_summary with the next wave of tasks. You cannot edit files.";
    case Role::worker:
        return "You are a Worker agent. Close the target obligations by editing only the files in your scope. "
               "Check your work with run_check and finish with write_summary.";
    case Role::review:
        return "You are the Review agent. Read the recent sessions and the report below and summarize the trend. "
               "You only have read access.";
    }
    return "";
}

// Cuts `text` after the last word that keeps the estimate within `max_tokens`.
std::string truncate_to_tokens(const std::string& text, std::size_t max_tokens) {
    if (estimate_tokens(text) <= max_tokens) return text;
    std::size_t keep_words = max_tokens * 10 / 13;
    std::size_t words = 0;
    bool in_word = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        bool space = std::isspace(static_cast<unsigned char>(text[i]));
        if (!space && !in_word) {
            if (words == keep_words) return text.substr(0, i);
            ++words;
        }
        in_word = !space;
    }
    return text;
}

std::string synthesize_summary(const SessionRecord& r) {
    std::ostringstream out;
    out << "Session " << r.id << " (" << to_string(r.role) << ", task " << r.task.id << ") ended "
        << to_string(r.outcome) << " after " << r.tool_calls << " tool call" << (r.tool_calls == 1 ? "" : "s");
    if (!r.edited.empty()) {
        out << "; edited";
        for (const auto& f : r.edited) out << " " << f;
    }
    for (auto it = r.turns.rbegin(); it != r.turns.rend(); ++it) {
        if (it->role == TurnRole::agent && !trim(it->content).empty()) {
            out << ". Last message: " << truncate_to_tokens(trim(it->content), 40);
            break;
        }
    }
    out << ".";
    return out.str();
}

}  // namespace

std::size_t SessionRecord::tokens() const {
    std::size_t n = 0;
    for (const auto& t : turns) n += t.token_estimate;
    return n;
}

json to_json(const SessionRecord& r) {
    json turns = json::array();
    for (const auto& t : r.turns) {
        json j{{"role", std::string(to_string(t.role))}, {"content", t.content}, {"tokens", t.token_estimate}};
        if (!t.tool_calls.empty()) {
            json calls = json::array();
            for (const auto& c : t.tool_calls) calls.push_back({{"tool", c.tool}, {"arguments", c.arguments}});
            j["tool_calls"] = calls;
        }
        if (t.result) j["result"] = {{"tool", t.result->tool}, {"ok", t.result->ok}, {"payload", t.result->payload}};
        if (t.signal != Signal::none) j["signal"] = t.signal == Signal::done ? "done" : "stuck";
        turns.push_back(j);
    }
    return {{"id", r.id},
            {"role", std::string(to_string(r.role))},
            {"task", to_json(r.task)},
            {"turns", turns},
            {"outcome", std::string(to_string(r.outcome))},
            {"summary", r.summary},
            {"started", r.started},
            {"ended", r.ended},
            {"tool_calls", r.tool_calls},
            {"tokens", r.tokens()},
            {"output", r.output},
            {"edited", r.edited}};
}

std::string build_system_prompt(const SessionRequest& req) {
    std::ostringstream head;
    head << "# Role: " << to_string(req.role) << "\n" << role_prompt(req.role) << "\n";
    auto skills = skills_for(req.skills, req.role);
    if (!skills.empty()) {
        head << "\n## Skills\n";
        for (const auto& s : skills) head << "\n### " << s.name << " (" << s.trigger << ")\n" << s.body << "\n";
    }
    const auto& t = req.task;
    head << "\n## Task " << t.id << " (" << t.kind << ")\n";
    if (!t.targets.empty()) {
        head << "Targets:";
        for (const auto& x : t.targets) head << " " << x;
        head << "\n";
    }
    if (!t.scope.empty()) {
        head << "Scope:";
        for (const auto& x : t.scope) head << " " << x;
        head << "\n";
    }
    if (!t.guidance.empty()) head << "Guidance:\n" << t.guidance << "\n";
    if (!t.constraints.empty()) head << "Constraints: " << t.constraints << "\n";

    auto prompt = head.str();
    if (req.materials.empty()) return prompt;
    std::string section = "\n## Materials\n";
    auto used = estimate_tokens(prompt + section);
    auto allowance = req.budget.tokens * 3 / 4;
    if (used >= allowance) return prompt;
    auto materials = truncate_to_tokens(req.materials, allowance - used);
    if (materials.size() < req.materials.size()) materials += "\n[materials truncated]";
    if (estimate_tokens(prompt + section + materials) > allowance) materials = truncate_to_tokens(req.materials, allowance - used - 2);
    return prompt + section + materials;
}

OpenSession open_session(SessionRequest request, Provider& provider) {
    OpenSession s;
    s.system_prompt = build_system_prompt(request);
    s.context = provider.open_context(ContextRequest{request.id, request.role, s.system_prompt, request.task});
    s.request = std::move(request);
    return s;
}

SessionRecord drive_session(OpenSession session, ToolEnv& env) {
    const auto& req = session.request;
    SessionRecord rec;
    rec.id = req.id;
    rec.role = req.role;
    rec.task = req.task;
    rec.started = env.clock ? env.clock->now() : "";

    SessionScope scope;
    scope.session = req.id;
    scope.role = req.role;
    scope.task = req.task;

    struct TokenGuard {
        Workspace* ws;
        std::vector<MutationToken>* tokens;
        ~TokenGuard() {
            if (!ws) return;
            for (const auto& t : *tokens) ws->locks().release(t);
        }
    } guard{env.workspace, &scope.tokens};

    bool finished = false;
    auto finish = [&](SessionOutcome o) {
        rec.outcome = o;
        finished = true;
    };

    if (req.role == Role::worker && env.workspace) {
        for (const auto& s : req.task.scope) {
            auto token = env.workspace->locks().acquire(s, req.id);
            if (!token) {
                rec.turns.push_back({TurnRole::system, "scope " + s + " is held by another session", {}, std::nullopt, 0, Signal::none});
                finish(SessionOutcome::aborted);
                break;
            }
            scope.tokens.push_back(*token);
        }
    }

    std::size_t used = 0;
    auto push = [&](Turn t) -> bool {
        t.token_estimate = estimate_tokens(t.role == TurnRole::agent ? turn_text(t) : t.content);
        if (used + t.token_estimate > req.budget.tokens) return false;
        used += t.token_estimate;
        rec.turns.push_back(std::move(t));
        return true;
    };

    if (!finished && !push({TurnRole::system, session.system_prompt, {}, std::nullopt, 0, Signal::none})) {
        finish(SessionOutcome::budget_exhausted);
    }

    std::size_t agent_turns = 0;
    while (!finished) {
        if (req.budget.max_turns && agent_turns >= *req.budget.max_turns) {
            finish(SessionOutcome::budget_exhausted);
            break;
        }
        std::optional<Turn> turn;
        for (int attempt = 0; attempt <= req.retry_limit && !turn; ++attempt) {
            try {
                turn = session.context->next_turn(rec.turns);
            } catch (const TransportError&) {
            }
        }
        if (!turn) {
            finish(SessionOutcome::aborted);
            break;
        }
        turn->role = TurnRole::agent;
        auto calls = turn->tool_calls;
        auto signal = turn->signal;
        if (!push(std::move(*turn))) {
            finish(SessionOutcome::budget_exhausted);
            break;
        }
        ++agent_turns;

        if (calls.empty()) {
            finish(signal == Signal::stuck ? SessionOutcome::stuck : SessionOutcome::completed);
            break;
        }
        for (const auto& call : calls) {
            auto result = dispatch_tool(call, scope, env);
            ++rec.tool_calls;
            Turn tool_turn{TurnRole::tool, result.payload.dump(), {}, result, 0, Signal::none};
            auto remaining = req.budget.tokens - used;
            if (estimate_tokens(tool_turn.content) > remaining) {
                tool_turn.content = truncate_to_tokens(tool_turn.content, remaining);
                push(std::move(tool_turn));
                finish(SessionOutcome::budget_exhausted);
                break;
            }
            push(std::move(tool_turn));
            if (call.tool == "write_summary" && result.ok) {
                auto o = scope.summary->value("outcome", std::string("completed"));
                finish(session_outcome_from_string(o));
                break;
            }
        }
        if (!finished && signal != Signal::none) finish(signal == Signal::stuck ? SessionOutcome::stuck : SessionOutcome::completed);
    }
    session.context->close();

    rec.edited = scope.edited;
    if (scope.summary) {
        rec.summary = trim(scope.summary->at("summary").get<std::string>());
        rec.output = *scope.summary;
        rec.output.erase("summary");
    }
    if (rec.summary.empty()) rec.summary = synthesize_summary(rec);
    rec.ended = env.clock ? env.clock->now() : "";
    return rec;
}

SessionRecord run_session(SessionRequest request, Provider& provider, ToolEnv& env) {
    return drive_session(open_session(std::move(request), provider), env);
}

}  // namespace archon
