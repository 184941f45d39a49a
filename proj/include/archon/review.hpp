#pragma once

#include "archon/ledger.hpp"

#include <string>
#include <vector>

namespace archon {

enum class Recommendation { continue_work, revise_decomposition, escalate_informal, request_guidance };
std::string_view to_string(Recommendation r);
Recommendation recommendation_from_string(std::string_view s);

struct StalledObligation {
    std::string obligation;
    std::size_t attempts = 0;  // length of the trailing run of identical failures

    bool operator==(const StalledObligation&) const = default;
};

struct ReviewReport {
    std::string first_session;
    std::string last_session;
    std::size_t sessions = 0;
    std::size_t closed_in_window = 0;
    std::size_t reopened = 0;
    std::vector<StalledObligation> stalled;
    Recommendation recommendation = Recommendation::continue_work;
    std::string notes;

    bool operator==(const ReviewReport&) const = default;
};

json to_json(const ReviewReport& r);
ReviewReport review_from_json(const json& j);

struct ReviewPolicy {
    std::size_t window = 6;
    std::size_t stall_threshold = 3;
};

/// Pure analysis of the last `window` worker sessions in the ledger.
///
/// An obligation is stalled when the trailing run of sessions that targeted it, none of
/// which closed it and all of which left the same diagnostic signature, is at least
/// `stall_threshold` long. The recommendation climbs one rung per consecutive stalled review.
ReviewReport review_cycle(const std::vector<LedgerEvent>& events, const ReviewPolicy& policy);

}  // namespace archon
