#include "archon/ledger.hpp"

#include "archon/error.hpp"

#include <fstream>
#include <sstream>

namespace archon {

std::string_view to_string(Phase p) {
    switch (p) {
    case Phase::scaffolding: return "scaffolding";
    case Phase::proving: return "proving";
    case Phase::polish: return "polish";
    case Phase::done: return "done";
    case Phase::failed: return "failed";
    }
    return "?";
}

Phase phase_from_string(std::string_view s) {
    for (auto p : {Phase::scaffolding, Phase::proving, Phase::polish, Phase::done, Phase::failed}) {
        if (to_string(p) == s) return p;
    }
    throw config_error("unknown phase '" + std::string(s) + "'");
}

bool legal_transition(Phase from, Phase to) {
    if (to == Phase::failed) return from != Phase::done && from != Phase::failed;
    switch (from) {
    case Phase::scaffolding: return to == Phase::proving;
    case Phase::proving: return to == Phase::proving || to == Phase::polish;
    case Phase::polish: return to == Phase::done || to == Phase::proving;
    default: return false;
    }
}

std::string_view to_string(EventType t) {
    switch (t) {
    case EventType::phase_change: return "phase_change";
    case EventType::session_summary: return "session_summary";
    case EventType::obligation_event: return "obligation_event";
    case EventType::refactor_event: return "refactor_event";
    case EventType::review_report: return "review_report";
    case EventType::gate_verdict: return "gate_verdict";
    case EventType::guidance_request: return "guidance_request";
    }
    return "?";
}

EventType event_type_from_string(std::string_view s) {
    for (auto t : {EventType::phase_change, EventType::session_summary, EventType::obligation_event,
                   EventType::refactor_event, EventType::review_report, EventType::gate_verdict,
                   EventType::guidance_request}) {
        if (to_string(t) == s) return t;
    }
    throw infra_error("unknown ledger event type '" + std::string(s) + "'");
}

json to_json(const LedgerEvent& e) {
    return {{"seq", e.seq}, {"ts", e.ts}, {"type", std::string(to_string(e.type))}, {"data", e.data}, {"hash", e.hash}};
}

LedgerEvent event_from_json(const json& j) {
    LedgerEvent e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.ts = j.at("ts").get<std::string>();
    e.type = event_type_from_string(j.at("type").get<std::string>());
    e.data = j.at("data");
    e.hash = j.at("hash").get<std::string>();
    return e;
}

std::string chain_hash(const std::string& previous, const LedgerEvent& e) {
    std::string material = previous + "|" + std::to_string(e.seq) + "|" + e.ts + "|" + std::string(to_string(e.type)) +
                           "|" + e.data.dump();
    return hex64(fnv1a(material));
}

namespace {

fs::path events_path(const fs::path& root) { return root / "ledger" / "events.ndjson"; }

const std::string kGenesis = "0000000000000000";

}  // namespace

std::vector<LedgerEvent> read_events(const fs::path& root) {
    std::vector<LedgerEvent> out;
    auto text = try_read_file(events_path(root));
    if (!text) return out;
    std::istringstream in(*text);
    std::string line;
    std::string prev = kGenesis;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        LedgerEvent e;
        try {
            e = event_from_json(json::parse(line));
        } catch (const json::exception& ex) {
            throw infra_error("corrupt ledger line " + std::to_string(out.size() + 1) + ": " + ex.what());
        }
        if (e.seq != out.size() + 1) throw infra_error("ledger sequence gap at event " + std::to_string(e.seq));
        if (chain_hash(prev, e) != e.hash) throw infra_error("ledger hash chain broken at event " + std::to_string(e.seq));
        prev = e.hash;
        out.push_back(std::move(e));
    }
    return out;
}

Ledger::Ledger(fs::path root, Clock& clock) : root_(std::move(root)), clock_(clock), events_(read_events(root_)) {
    fs::create_directories(root_ / "ledger");
}

LedgerEvent Ledger::append(EventType type, json data) {
    std::lock_guard lock(mutex_);
    LedgerEvent e;
    e.seq = events_.size() + 1;
    e.ts = clock_.now();
    e.type = type;
    e.data = std::move(data);
    e.hash = chain_hash(events_.empty() ? kGenesis : events_.back().hash, e);

    std::ofstream out(events_path(root_), std::ios::app | std::ios::binary);
    out << to_json(e).dump() << "\n";
    out.flush();
    if (!out) throw infra_error("cannot append to " + events_path(root_).string());
    events_.push_back(e);
    write_status_locked();
    return e;
}

std::vector<LedgerEvent> Ledger::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

std::size_t Ledger::size() const {
    std::lock_guard lock(mutex_);
    return events_.size();
}

std::string Ledger::head_hash() const {
    std::lock_guard lock(mutex_);
    return events_.empty() ? kGenesis : events_.back().hash;
}

void Ledger::write_status_locked() const {
    write_file_atomic(root_ / "ledger" / "status.json", to_json(fold(events_)).dump(2) + "\n");
}

// ---- fold ------------------------------------------------------------------------------

std::vector<std::string> LedgerView::open_obligations() const {
    std::vector<std::string> out;
    for (const auto& [id, ob] : obligations) {
        if (ob.status == ObligationStatus::open || ob.status == ObligationStatus::in_progress) out.push_back(id);
    }
    return out;
}

LedgerView fold(const std::vector<LedgerEvent>& events) {
    LedgerView v;
    for (const auto& e : events) {
        const auto& d = e.data;
        switch (e.type) {
        case EventType::phase_change:
            v.phase = phase_from_string(d.at("to").get<std::string>());
            v.awaiting_guidance = false;
            break;
        case EventType::session_summary:
            ++v.sessions;
            if (d.value("role", "") == "plan") ++v.plan_cycles;
            for (const auto& g : d.value("guidance_files", std::vector<std::string>{})) v.injected_guidance.insert(g);
            if (d.value("role", "") == "plan") v.awaiting_guidance = false;
            break;
        case EventType::obligation_event: {
            auto id = d.at("obligation").get<std::string>();
            auto& ob = v.obligations[id];
            ob.id = id;
            ob.file = d.value("file", ob.file);
            ob.declaration = d.value("declaration", ob.declaration);
            auto what = d.at("event").get<std::string>();
            if (what == "opened" || what == "reopened") {
                ob.status = ObligationStatus::open;
            } else if (what == "closed") {
                ob.status = ObligationStatus::closed;
            } else if (what == "refactored") {
                ob.status = ObligationStatus::closed;
                ob.history.push_back({d.value("session", ""), "refactored"});
            } else if (what == "attempted") {
                ++ob.attempts;
                ob.history.push_back({d.value("session", ""), d.value("outcome", "")});
            } else if (what == "deferred") {
                ob.status = ObligationStatus::deferred;
            }
            break;
        }
        case EventType::review_report: v.last_review = d; break;
        case EventType::gate_verdict: v.last_verdict = d; break;
        case EventType::guidance_request:
            ++v.plan_cycles;
            v.awaiting_guidance = true;
            break;
        case EventType::refactor_event: break;
        }
    }
    for (const auto& [id, ob] : v.obligations) {
        auto& f = v.files[ob.file];
        if (ob.status == ObligationStatus::closed) {
            ++f.closed;
        } else if (ob.status != ObligationStatus::deferred) {
            ++f.open;
        }
    }
    v.events = events.size();
    v.head_hash = events.empty() ? kGenesis : events.back().hash;
    return v;
}

json to_json(const LedgerView& v) {
    json obs = json::object();
    for (const auto& [id, ob] : v.obligations) {
        json hist = json::array();
        for (const auto& h : ob.history) hist.push_back({{"session", h.session}, {"outcome", h.outcome}});
        obs[id] = {{"file", ob.file},
                   {"declaration", ob.declaration},
                   {"status", std::string(to_string(ob.status))},
                   {"attempts", ob.attempts},
                   {"history", hist}};
    }
    json files = json::object();
    for (const auto& [f, fv] : v.files) files[f] = {{"open", fv.open}, {"closed", fv.closed}};
    return {{"phase", v.phase ? json(std::string(to_string(*v.phase))) : json()},
            {"obligations", obs},
            {"open_obligations", v.open_obligations()},
            {"files", files},
            {"sessions", v.sessions},
            {"plan_cycles", v.plan_cycles},
            {"last_review", v.last_review ? *v.last_review : json()},
            {"last_verdict", v.last_verdict ? *v.last_verdict : json()},
            {"awaiting_guidance", v.awaiting_guidance},
            {"events", v.events},
            {"head_hash", v.head_hash}};
}

json recent_summaries(const std::vector<LedgerEvent>& events, std::size_t count) {
    json out = json::array();
    for (auto it = events.rbegin(); it != events.rend() && out.size() < count; ++it) {
        if (it->type != EventType::session_summary) continue;
        const auto& d = it->data;
        out.insert(out.begin(), json{{"session", d.value("session", "")},
                                     {"role", d.value("role", "")},
                                     {"task", d.value("task", json::object()).value("id", "")},
                                     {"outcome", d.value("outcome", "")},
                                     {"summary", d.value("summary", "")}});
    }
    return out;
}

std::vector<std::string> normalized_lines(const std::vector<LedgerEvent>& events) {
    std::vector<std::string> out;
    for (const auto& e : events) {
        out.push_back(json{{"seq", e.seq}, {"type", std::string(to_string(e.type))}, {"data", e.data}}.dump());
    }
    return out;
}

}  // namespace archon
