#include "archon/agents.hpp"

#include <algorithm>

namespace archon {

bool in_scope(const PlanTask& task, std::string_view path) {
    return std::any_of(task.scope.begin(), task.scope.end(), [&](const std::string& s) { return scope_covers(s, path); });
}

namespace {

ToolResult fail(const std::string& tool, const std::string& kind, const std::string& message) {
    return {tool, false, {{"error", kind}, {"message", message}}};
}

std::string str_arg(const json& args, const char* key) {
    if (!args.is_object() || !args.contains(key) || !args[key].is_string()) {
        throw contract_error(std::string("missing string argument '") + key + "'");
    }
    return args[key].get<std::string>();
}

ToolResult run_check_tool(const SessionScope& scope, ToolEnv& env) {
    auto state = env.workspace->snapshot();
    auto report = check(state, env.checker);
    bool whole = scope.task.scope.empty();
    json diags = json::array();
    std::size_t errors = 0, warnings = 0;
    for (const auto& d : report.diagnostics) {
        bool relevant = whole || in_scope(scope.task, d.file) || d.file == kBackendPath;
        if (!relevant || d.severity == Severity::info) continue;
        diags.push_back(json(d));
        if (d.severity == Severity::error) ++errors;
        if (d.severity == Severity::warning) ++warnings;
    }
    json footprint = json::object();
    for (const auto& [id, d] : state.declarations) {
        if (!whole && !in_scope(scope.task, d.file)) continue;
        auto it = report.axiom_footprint.find(id);
        if (it == report.axiom_footprint.end()) it = report.axiom_footprint.find(d.name);
        if (it != report.axiom_footprint.end()) footprint[it->first] = it->second;
    }
    return {"run_check",
            true,
            {{"success", errors == 0}, {"errors", errors}, {"warnings", warnings}, {"diagnostics", diags},
             {"axiom_footprint", footprint}}};
}

ToolResult search_tool(const json& args, ToolEnv& env) {
    auto query = str_arg(args, "query");
    auto k = args.value("k", std::size_t{5});
    json hits = json::array();
    if (env.index) {
        for (const auto& h : env.index->search(query, k)) {
            hits.push_back({{"id", h.id}, {"statement", h.statement}, {"score", h.score}});
        }
    }
    return {"search_library", true, {{"results", hits}}};
}

ToolResult edit_tool(const json& args, SessionScope& scope, ToolEnv& env) {
    auto raw = str_arg(args, "path");
    auto rel = confine_relative(raw);
    if (!rel) return fail("edit_file", "scope", "path escapes the workspace: " + raw);
    if (!in_scope(scope.task, *rel)) return fail("edit_file", "scope", *rel + " is outside the task scope");
    auto token = std::find_if(scope.tokens.begin(), scope.tokens.end(),
                              [&](const MutationToken& t) { return scope_covers(t.scope, *rel); });
    if (token == scope.tokens.end()) return fail("edit_file", "scope", "no mutation token covers " + *rel);

    std::string content;
    if (args.contains("content")) {
        content = str_arg(args, "content");
    } else if (args.contains("replace")) {
        const auto& rep = args["replace"];
        auto old_text = str_arg(rep, "old");
        auto new_text = str_arg(rep, "new");
        auto state = env.workspace->snapshot();
        auto it = state.files.find(*rel);
        if (it == state.files.end()) return fail("edit_file", "not_found", *rel + " does not exist");
        const auto& cur = it->second.content;
        auto at = cur.find(old_text);
        if (old_text.empty() || at == std::string::npos) return fail("edit_file", "not_found", "text to replace not found");
        if (cur.find(old_text, at + 1) != std::string::npos) {
            return fail("edit_file", "ambiguous", "text to replace occurs more than once");
        }
        content = cur;
        content.replace(at, old_text.size(), new_text);
    } else {
        return fail("edit_file", "arguments", "edit_file needs 'content' or 'replace'");
    }

    env.workspace->edit(Edit{*rel, content, scope.session}, *token);
    scope.edited.insert(*rel);
    auto state = env.workspace->snapshot();
    return {"edit_file", true, {{"path", *rel}, {"version", state.files.at(*rel).version}}};
}

ToolResult ledger_tool(const json& args, ToolEnv& env) {
    auto limit = args.is_object() ? args.value("limit", std::size_t{5}) : std::size_t{5};
    return {"read_ledger", true, {{"summaries", env.read_ledger ? env.read_ledger(limit) : json::array()}}};
}

ToolResult summary_tool(const json& args, SessionScope& scope) {
    auto text = trim(str_arg(args, "summary"));
    if (text.empty()) return fail("write_summary", "arguments", "summary must not be empty");
    if (args.contains("outcome")) {
        auto o = session_outcome_from_string(args["outcome"].get<std::string>());
        if (o != SessionOutcome::completed && o != SessionOutcome::stuck) {
            return fail("write_summary", "arguments", "outcome must be completed or stuck");
        }
    }
    if (args.contains("tasks") && scope.role != Role::plan) {
        return fail("write_summary", "arguments", "only plan sessions emit tasks");
    }
    scope.summary = args;
    return {"write_summary", true, {{"accepted", true}}};
}

}  // namespace

ToolResult dispatch_tool(const ToolCall& call, SessionScope& scope, ToolEnv& env) {
    const auto& tool = call.tool;
    if (std::find(tool_names().begin(), tool_names().end(), tool) == tool_names().end()) {
        return fail(tool, "unknown_tool", "no tool named '" + tool + "'");
    }
    if (!tools_for(scope.role).count(tool)) {
        return fail(tool, "disabled", tool + " is not available to the " + std::string(to_string(scope.role)) + " role");
    }
    const auto& args = call.arguments;
    try {
        if (tool == "run_check") return run_check_tool(scope, env);
        if (tool == "search_library") return search_tool(args, env);
        if (tool == "ask_informal") {
            auto question = str_arg(args, "question");
            auto tier = args.value("tier", std::string("light"));
            if (!env.informal) return fail(tool, "unavailable", "no informal provider configured");
            return {tool, true, {{"answer", env.informal->ask_informal(question, tier)}, {"tier", tier}}};
        }
        if (tool == "read_reference") {
            auto name = str_arg(args, "name");
            auto text = read_reference(env.workspace->root(), name);
            if (!text) return fail(tool, "not_found", "no reference named '" + name + "'");
            return {tool, true, {{"name", name}, {"text", *text}}};
        }
        if (tool == "record_route") {
            auto obligation = str_arg(args, "obligation");
            auto text = str_arg(args, "text");
            auto tag = scope.session + "-" + std::to_string(++scope.route_count);
            return {tool, true, {{"path", record_route(env.workspace->root(), obligation, tag, text)}}};
        }
        if (tool == "edit_file") return edit_tool(args, scope, env);
        if (tool == "read_ledger") return ledger_tool(args, env);
        return summary_tool(args, scope);
    } catch (const TransportError& e) {
        return fail(tool, "transport", e.what());
    } catch (const Error& e) {
        return fail(tool, e.kind() == ErrorKind::contract ? "scope" : "error", e.what());
    } catch (const json::exception& e) {
        return fail(tool, "arguments", e.what());
    }
}

}  // namespace archon
