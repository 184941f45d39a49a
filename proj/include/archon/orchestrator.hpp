#pragma once

#include "archon/agents.hpp"
#include "archon/config.hpp"
#include "archon/gate.hpp"
#include "archon/ledger.hpp"
#include "archon/review.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace archon {

/// One claim of an informal proof: a `# lemma <label>` or `# theorem <label>` heading and its body.
struct InformalClaim {
    std::string kind;
    std::string label;
    std::string body;
};

std::vector<InformalClaim> parse_informal_claims(std::string_view text);

/// Exclusive lock on a workspace, held through `ledger/.lock`. A lock left behind by a
/// dead process is taken over.
class WorkspaceLock {
public:
    explicit WorkspaceLock(const fs::path& root);
    ~WorkspaceLock();
    WorkspaceLock(const WorkspaceLock&) = delete;
    WorkspaceLock& operator=(const WorkspaceLock&) = delete;

    static bool held(const fs::path& root);

private:
    fs::path path_;
};

struct RunResult {
    Phase phase = Phase::scaffolding;
    std::string reason;
    std::optional<GateVerdict> verdict;
    std::optional<ReviewReport> review;
    std::size_t plan_cycles = 0;
};

/// Drives a workspace through scaffolding, plan/prove/review cycles and polish.
/// Every transition and session is committed to the ledger.
class Orchestrator {
public:
    Orchestrator(fs::path root, Config config, Provider& provider, Clock& clock);

    /// Runs until done, failed, the iteration cap, a guidance request, or `stop_at` is reached.
    RunResult run(std::optional<Phase> stop_at = std::nullopt);

    void scaffold();
    std::vector<PlanTask> plan_cycle();
    std::vector<SessionRecord> prove_cycle(const std::vector<PlanTask>& tasks);
    ReviewReport review_cycle();
    GateVerdict polish_cycle();

    /// Logs the first phase when the ledger is empty.
    void start();

    std::optional<Phase> phase() const;
    ProjectState state() const { return workspace_.snapshot(); }
    Ledger& ledger() { return ledger_; }
    const Config& config() const { return config_; }

    /// Rescans the workspace from disk and reconciles obligations with the ledger.
    void refresh();

private:
    struct Assessment;

    void set_phase(Phase to, const std::string& reason, nlohmann::json extra = nlohmann::json::object());
    std::string next_session_id();
    Assessment assess(const ProjectState& state) const;
    void reconcile(const std::string& session, bool gate_reopen = false);
    void install_obligations();
    std::string signature(const ProjectState& state, const CheckReport& report, const std::string& obligation) const;
    SessionRequest request_for(const std::string& id, Role role, PlanTask task, std::string materials) const;
    void commit_session(const SessionRecord& rec, nlohmann::json extra);
    std::vector<std::string> pending_guidance() const;
    std::string scope_materials(const std::vector<std::string>& scope) const;

    fs::path root_;
    Config config_;
    Provider& provider_;
    Clock& clock_;
    Ledger ledger_;
    Workspace workspace_;
    std::vector<SkillDoc> skills_;
    std::unique_ptr<StatementIndex> index_;
    ToolEnv env_;
    std::size_t session_counter_ = 0;
};

}  // namespace archon
