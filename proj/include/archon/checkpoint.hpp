#pragma once

#include "archon/clock.hpp"
#include "archon/util.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace archon {

struct Checkpoint {
    std::string id;
    std::string created;
    std::size_t ledger_position = 0;  // number of events captured
    std::string ledger_hash;          // hash of the last captured event

    bool operator==(const Checkpoint&) const = default;
};

nlohmann::json to_json(const Checkpoint& c);

/// Snapshots the workspace and the ledger under `checkpoints/<id>/`. The caller must
/// guarantee quiescence (no active sessions). Fails if the id is taken.
Checkpoint create_checkpoint(const fs::path& root, const std::string& id, Clock& clock);

std::vector<Checkpoint> list_checkpoints(const fs::path& root);

/// Loads and validates a checkpoint; throws not-found or infrastructure errors.
Checkpoint load_checkpoint(const fs::path& root, const std::string& id);

/// Reproduces the checkpointed workspace and ledger prefix at `target`.
/// Restoring onto `root` itself archives the discarded ledger under `ledger/abandoned/`;
/// any other target must be empty or absent and receives a copy of `checkpoints/` too.
/// Nothing is modified when the snapshot is missing or damaged.
void restore_checkpoint(const fs::path& root, const std::string& id, const fs::path& target);

}  // namespace archon
