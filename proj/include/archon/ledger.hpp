#pragma once

#include "archon/clock.hpp"
#include "archon/util.hpp"
#include "archon/workspace.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace archon {

using nlohmann::json;

enum class Phase { scaffolding, proving, polish, done, failed };
std::string_view to_string(Phase p);
Phase phase_from_string(std::string_view s);

/// scaffolding→proving, proving→proving, proving→polish, polish→done, polish→proving, any→failed.
bool legal_transition(Phase from, Phase to);

enum class EventType {
    phase_change,
    session_summary,
    obligation_event,
    refactor_event,
    review_report,
    gate_verdict,
    guidance_request,
};
std::string_view to_string(EventType t);
EventType event_type_from_string(std::string_view s);

struct LedgerEvent {
    std::uint64_t seq = 0;
    std::string ts;
    EventType type = EventType::phase_change;
    json data = json::object();
    std::string hash;  // chains over the previous event's hash

    bool operator==(const LedgerEvent&) const = default;
};

json to_json(const LedgerEvent& e);
LedgerEvent event_from_json(const json& j);
std::string chain_hash(const std::string& previous, const LedgerEvent& e);

/// Parses `ledger/events.ndjson`, verifying sequence numbers and the hash chain.
std::vector<LedgerEvent> read_events(const fs::path& root);

/// Append-only event log at `ledger/events.ndjson`. Appends are serialized and each
/// one is flushed before returning; the derived snapshot `ledger/status.json` is
/// rewritten atomically after every append.
class Ledger {
public:
    Ledger(fs::path root, Clock& clock);

    LedgerEvent append(EventType type, json data);
    std::vector<LedgerEvent> events() const;
    std::size_t size() const;
    std::string head_hash() const;
    const fs::path& root() const { return root_; }
    Clock& clock() { return clock_; }

private:
    void write_status_locked() const;

    fs::path root_;
    Clock& clock_;
    mutable std::mutex mutex_;
    std::vector<LedgerEvent> events_;
};

// ---- derived views ----------------------------------------------------------------

struct ObligationView {
    std::string id;
    std::string file;
    std::string declaration;
    ObligationStatus status = ObligationStatus::open;
    std::size_t attempts = 0;
    std::vector<AttemptRecord> history;
};

struct FileView {
    std::size_t open = 0;
    std::size_t closed = 0;
};

struct LedgerView {
    std::optional<Phase> phase;
    std::map<std::string, ObligationView> obligations;
    std::map<std::string, FileView> files;
    std::size_t sessions = 0;
    std::size_t plan_cycles = 0;
    std::optional<json> last_review;
    std::optional<json> last_verdict;
    std::set<std::string> injected_guidance;
    bool awaiting_guidance = false;
    std::size_t events = 0;
    std::string head_hash;

    std::vector<std::string> open_obligations() const;
};

/// Pure fold over the event sequence.
LedgerView fold(const std::vector<LedgerEvent>& events);
json to_json(const LedgerView& view);

/// The `count` most recent session summaries as `{session, role, task, outcome, summary}`.
json recent_summaries(const std::vector<LedgerEvent>& events, std::size_t count);

/// Event lines with timestamps and hashes stripped, for comparing runs.
std::vector<std::string> normalized_lines(const std::vector<LedgerEvent>& events);

}  // namespace archon
