#include "archon/config.hpp"

#include "archon/toml.hpp"

namespace archon {

std::string_view to_string(ScheduleMode m) {
    switch (m) {
    case ScheduleMode::parallel: return "parallel";
    case ScheduleMode::forward: return "forward";
    case ScheduleMode::reverse: return "reverse";
    }
    return "?";
}

namespace {

using nlohmann::json;

class Section {
public:
    Section(const json& root, std::string name) : name_(std::move(name)) {
        if (!root.contains(name_)) return;
        if (!root[name_].is_object()) throw config_error("[" + name_ + "] must be a table");
        table_ = root[name_];
    }

    template <typename F>
    void take(const std::string& key, F&& apply) {
        seen_.insert(key);
        if (!table_.contains(key)) return;
        try {
            apply(table_[key]);
        } catch (const json::exception&) {
            throw config_error(name_ + "." + key + " has the wrong type");
        }
    }

    void str(const std::string& key, std::string& out) {
        take(key, [&](const json& v) { out = v.get<std::string>(); });
    }
    void boolean(const std::string& key, bool& out) {
        take(key, [&](const json& v) { out = v.get<bool>(); });
    }
    void count(const std::string& key, std::size_t& out) {
        take(key, [&](const json& v) {
            auto n = v.get<long long>();
            if (n < 0) throw config_error(name_ + "." + key + " must not be negative");
            out = static_cast<std::size_t>(n);
        });
    }

    void finish() const {
        for (const auto& [k, v] : table_.items()) {
            if (!seen_.count(k)) throw config_error("unknown key '" + k + "' in [" + name_ + "]");
        }
    }

private:
    std::string name_;
    json table_ = json::object();
    std::set<std::string> seen_;
};

}  // namespace

Config parse_config(std::string_view text) {
    auto root = parse_toml(text);
    static const std::set<std::string> sections{"schema_version", "backend", "provider", "policy",
                                                "budgets",        "paths",   "run"};
    for (const auto& [k, v] : root.items()) {
        if (!sections.count(k)) throw config_error("unknown top-level key '" + k + "'");
    }
    if (!root.contains("schema_version")) throw config_error("archon.toml lacks schema_version");
    if (!root["schema_version"].is_number_integer() || root["schema_version"].get<int>() != kSchemaVersion) {
        throw config_error("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    }

    Config c;
    {
        Section s(root, "backend");
        std::string kind = "toy";
        s.str("kind", kind);
        c.checker.backend = backend_from_string(kind);
        s.str("command", c.checker.command);
        s.take("timeout_ms", [&](const json& v) {
            auto ms = v.get<long long>();
            if (ms < 0) throw config_error("backend.timeout_ms must not be negative");
            c.checker.timeout = ms == 0 ? std::nullopt : std::optional(std::chrono::milliseconds(ms));
        });
        s.finish();
        if (c.checker.backend == Backend::external && c.checker.command.empty()) {
            throw config_error("backend.kind = \"external\" needs backend.command");
        }
    }
    {
        Section s(root, "provider");
        s.str("kind", c.provider.kind);
        if (c.provider.kind != "scripted" && c.provider.kind != "http") {
            throw config_error("provider.kind must be \"scripted\" or \"http\"");
        }
        s.str("script", c.provider.script);
        s.str("endpoint", c.provider.http.endpoint);
        s.str("model", c.provider.http.model);
        s.str("api_key_env", c.provider.http.api_key_env);
        s.count("max_tokens", c.provider.http.max_tokens);
        s.take("timeout_ms", [&](const json& v) { c.provider.http.timeout = std::chrono::milliseconds(v.get<long long>()); });
        s.take("retry_limit", [&](const json& v) { c.provider.retry_limit = v.get<int>(); });
        s.finish();
        if (c.provider.kind == "http" && c.provider.http.endpoint.empty()) {
            throw config_error("provider.kind = \"http\" needs provider.endpoint");
        }
    }
    {
        auto dialect = c.checker.backend == Backend::toy ? Dialect::toy : Dialect::external;
        c.policy = default_policy(dialect);
        Section s(root, "policy");
        s.take("lexicon", [&](const json& v) {
            if (!v.is_object()) throw json::type_error::create(302, "lexicon", nullptr);
            c.policy.lexicon.clear();
            for (const auto& [token, category] : v.items()) {
                c.policy.lexicon[token] = hatch_category_from_string(category.get<std::string>());
            }
        });
        s.take("allowed_axioms", [&](const json& v) { c.policy.allowed_axioms = v.get<std::set<std::string>>(); });
        s.boolean("allow_declared_axioms", c.policy.allow_declared_axioms);
        s.finish();
    }
    {
        Section s(root, "budgets");
        s.count("worker_tokens", c.budgets.worker_tokens);
        s.count("plan_tokens", c.budgets.plan_tokens);
        s.count("review_tokens", c.budgets.review_tokens);
        s.take("max_turns", [&](const json& v) {
            auto n = v.get<long long>();
            c.budgets.max_turns = n <= 0 ? std::nullopt : std::optional<std::size_t>(n);
        });
        s.count("stall_threshold", c.budgets.stall_threshold);
        s.count("review_window", c.budgets.review_window);
        s.count("iteration_cap", c.budgets.iteration_cap);
        s.count("parallelism", c.budgets.parallelism);
        s.finish();
        if (c.budgets.parallelism == 0) throw config_error("budgets.parallelism must be at least 1");
        if (c.budgets.review_window < c.budgets.stall_threshold) {
            throw config_error("budgets.review_window must be at least budgets.stall_threshold");
        }
    }
    {
        Section s(root, "paths");
        s.str("spec", c.paths.spec);
        s.str("corpus", c.paths.corpus);
        s.str("informal_proof", c.paths.informal_proof);
        s.str("skills", c.paths.skills);
        s.finish();
        for (const auto* p : {&c.paths.spec, &c.paths.corpus, &c.paths.informal_proof, &c.paths.skills}) {
            if (!confine_relative(*p)) throw config_error("path escapes the workspace: " + *p);
        }
    }
    {
        Section s(root, "run");
        s.boolean("replay", c.run.replay);
        s.boolean("quality_pass", c.run.quality_pass);
        s.boolean("review_agent", c.run.review_agent);
        s.take("schedule", [&](const json& v) {
            auto m = v.get<std::string>();
            if (m == "parallel") {
                c.run.schedule = ScheduleMode::parallel;
            } else if (m == "forward") {
                c.run.schedule = ScheduleMode::forward;
            } else if (m == "reverse") {
                c.run.schedule = ScheduleMode::reverse;
            } else {
                throw config_error("run.schedule must be parallel, forward or reverse");
            }
        });
        s.finish();
    }
    return c;
}

Config load_config(const fs::path& root) {
    auto text = try_read_file(root / kConfigFile);
    if (!text) throw config_error("no " + std::string(kConfigFile) + " in " + root.string());
    return parse_config(*text);
}

std::string default_config_text() {
    return R"(schema_version = 1

[backend]
kind = "toy"              # toy | external
# command = "lake env lean {file}"   # external only; {root} and {file} are expanded
timeout_ms = 30000        # per-file timeout for the external backend, 0 = none

[provider]
kind = "scripted"         # scripted | http
script = "script.json"
# endpoint = "http://localhost:8080/v1/turn"
# model = ""
# api_key_env = "ARCHON_API_KEY"
max_tokens = 1024
retry_limit = 2

[policy]
# lexicon defaults to sorry/by_axiom/unsafe_eval for the toy backend and
# sorry/sorryAx/admit/axiom/unsafe for the external one.
allowed_axioms = []
allow_declared_axioms = false

[budgets]
worker_tokens = 4096
plan_tokens = 2048
review_tokens = 2048
max_turns = 0             # 0 = unlimited
stall_threshold = 3
review_window = 6
iteration_cap = 50
parallelism = 4

[paths]
spec = "spec/Challenge.mck"
corpus = "references/corpus.jsonl"
informal_proof = "references/informal_proof.md"
skills = ".archon/skills"

[run]
replay = false
quality_pass = true
review_agent = false
schedule = "parallel"     # parallel | forward | reverse
)";
}

json to_json(const Config& c) {
    json lexicon = json::object();
    for (const auto& [t, cat] : c.policy.lexicon) lexicon[t] = std::string(to_string(cat));
    return {{"schema_version", c.schema_version},
            {"backend",
             {{"kind", std::string(to_string(c.checker.backend))},
              {"command", c.checker.command},
              {"timeout_ms", c.checker.timeout ? c.checker.timeout->count() : 0}}},
            {"provider",
             {{"kind", c.provider.kind},
              {"script", c.provider.script},
              {"endpoint", c.provider.http.endpoint},
              {"model", c.provider.http.model},
              {"api_key_env", c.provider.http.api_key_env},
              {"max_tokens", c.provider.http.max_tokens},
              {"retry_limit", c.provider.retry_limit}}},
            {"policy",
             {{"lexicon", lexicon},
              {"allowed_axioms", c.policy.allowed_axioms},
              {"allow_declared_axioms", c.policy.allow_declared_axioms}}},
            {"budgets",
             {{"worker_tokens", c.budgets.worker_tokens},
              {"plan_tokens", c.budgets.plan_tokens},
              {"review_tokens", c.budgets.review_tokens},
              {"max_turns", c.budgets.max_turns ? *c.budgets.max_turns : 0},
              {"stall_threshold", c.budgets.stall_threshold},
              {"review_window", c.budgets.review_window},
              {"iteration_cap", c.budgets.iteration_cap},
              {"parallelism", c.budgets.parallelism}}},
            {"paths",
             {{"spec", c.paths.spec},
              {"corpus", c.paths.corpus},
              {"informal_proof", c.paths.informal_proof},
              {"skills", c.paths.skills}}},
            {"run",
             {{"replay", c.run.replay},
              {"quality_pass", c.run.quality_pass},
              {"review_agent", c.run.review_agent},
              {"schedule", std::string(to_string(c.run.schedule))}}}};
}

}  // namespace archon
