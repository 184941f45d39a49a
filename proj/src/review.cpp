#include "archon/review.hpp"

#include "archon/error.hpp"

#include <algorithm>

namespace archon {

std::string_view to_string(Recommendation r) {
    switch (r) {
    case Recommendation::continue_work: return "continue";
    case Recommendation::revise_decomposition: return "revise_decomposition";
    case Recommendation::escalate_informal: return "escalate_informal";
    case Recommendation::request_guidance: return "request_guidance";
    }
    return "?";
}

Recommendation recommendation_from_string(std::string_view s) {
    for (auto r : {Recommendation::continue_work, Recommendation::revise_decomposition,
                   Recommendation::escalate_informal, Recommendation::request_guidance}) {
        if (to_string(r) == s) return r;
    }
    throw config_error("unknown recommendation '" + std::string(s) + "'");
}

json to_json(const ReviewReport& r) {
    json stalled = json::array();
    for (const auto& s : r.stalled) stalled.push_back({{"obligation", s.obligation}, {"attempts", s.attempts}});
    return {{"window", {{"first", r.first_session}, {"last", r.last_session}, {"sessions", r.sessions}}},
            {"closed_in_window", r.closed_in_window},
            {"reopened", r.reopened},
            {"stalled_obligations", stalled},
            {"recommendation", std::string(to_string(r.recommendation))},
            {"notes", r.notes}};
}

ReviewReport review_from_json(const json& j) {
    ReviewReport r;
    const auto& w = j.at("window");
    r.first_session = w.value("first", "");
    r.last_session = w.value("last", "");
    r.sessions = w.value("sessions", std::size_t{0});
    r.closed_in_window = j.value("closed_in_window", std::size_t{0});
    r.reopened = j.value("reopened", std::size_t{0});
    for (const auto& s : j.value("stalled_obligations", json::array())) {
        r.stalled.push_back({s.at("obligation").get<std::string>(), s.at("attempts").get<std::size_t>()});
    }
    r.recommendation = recommendation_from_string(j.at("recommendation").get<std::string>());
    r.notes = j.value("notes", "");
    return r;
}

ReviewReport review_cycle(const std::vector<LedgerEvent>& events, const ReviewPolicy& policy) {
    std::vector<const LedgerEvent*> workers;
    for (const auto& e : events) {
        if (e.type == EventType::session_summary && e.data.value("role", "") == "worker") workers.push_back(&e);
    }
    std::size_t start = workers.size() > policy.window ? workers.size() - policy.window : 0;
    std::vector<const LedgerEvent*> window(workers.begin() + static_cast<std::ptrdiff_t>(start), workers.end());

    ReviewReport r;
    r.sessions = window.size();
    if (!window.empty()) {
        r.first_session = window.front()->data.value("session", "");
        r.last_session = window.back()->data.value("session", "");
        auto first_seq = window.front()->seq;
        for (const auto& e : events) {
            if (e.seq >= first_seq && e.type == EventType::obligation_event && e.data.value("event", "") == "reopened") {
                ++r.reopened;
            }
        }
    }

    std::set<std::string> targeted;
    for (const auto* e : window) {
        r.closed_in_window += e->data.value("closed", json::array()).size();
        for (const auto& t : e->data.value("targets", std::vector<std::string>{})) targeted.insert(t);
    }

    for (const auto& ob : targeted) {
        std::size_t run = 0;
        std::optional<std::string> signature;
        for (auto it = window.rbegin(); it != window.rend(); ++it) {
            const auto& d = (*it)->data;
            auto targets = d.value("targets", std::vector<std::string>{});
            if (std::find(targets.begin(), targets.end(), ob) == targets.end()) continue;
            auto closed = d.value("closed", std::vector<std::string>{});
            if (std::find(closed.begin(), closed.end(), ob) != closed.end()) break;
            auto sig = d.value("signatures", json::object()).value(ob, std::string());
            if (signature && sig != *signature) break;
            signature = sig;
            ++run;
        }
        if (run >= policy.stall_threshold && policy.stall_threshold > 0) r.stalled.push_back({ob, run});
    }

    if (r.stalled.empty()) {
        r.recommendation = Recommendation::continue_work;
        r.notes = r.sessions == 0 ? "no worker sessions yet" : "progressing";
        return r;
    }
    std::size_t streak = 1;
    for (auto it = events.rbegin(); it != events.rend(); ++it) {
        if (it->type != EventType::review_report) continue;
        if (it->data.value("stalled_obligations", json::array()).empty()) break;
        ++streak;
    }
    static const Recommendation ladder[] = {Recommendation::revise_decomposition, Recommendation::escalate_informal,
                                            Recommendation::request_guidance};
    r.recommendation = ladder[std::min<std::size_t>(streak, 3) - 1];
    r.notes = std::to_string(r.stalled.size()) + " obligation(s) stalled; review streak " + std::to_string(streak);
    return r;
}

}  // namespace archon
