#include "archon/checkpoint.hpp"

#include "archon/error.hpp"
#include "archon/ledger.hpp"

#include <algorithm>

namespace archon {

namespace {

const std::set<std::string>& untracked_entries() {
    static const std::set<std::string> names{"checkpoints", "ledger", ".git"};
    return names;
}

bool is_staging(const std::string& name) { return starts_with(name, ".restore-") || starts_with(name, ".tmp-"); }

void copy_entry(const fs::path& from, const fs::path& to) {
    if (fs::is_directory(from)) {
        copy_tree(from, to);
    } else {
        fs::create_directories(to.parent_path());
        fs::copy_file(from, to, fs::copy_options::overwrite_existing);
    }
}

void copy_workspace(const fs::path& root, const fs::path& dest) {
    fs::create_directories(dest);
    for (const auto& e : fs::directory_iterator(root)) {
        auto name = e.path().filename().string();
        if (untracked_entries().count(name) || is_staging(name)) continue;
        copy_entry(e.path(), dest / name);
    }
}

void copy_ledger(const fs::path& from_ledger, const fs::path& dest_ledger) {
    fs::create_directories(dest_ledger);
    if (!fs::exists(from_ledger)) return;
    for (const auto& e : fs::directory_iterator(from_ledger)) {
        auto name = e.path().filename().string();
        if (name == ".lock" || name == "abandoned") continue;
        copy_entry(e.path(), dest_ledger / name);
    }
}

fs::path checkpoint_dir(const fs::path& root, const std::string& id) { return root / "checkpoints" / id; }

bool valid_id(const std::string& id) {
    return !id.empty() && id[0] != '.' && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    });
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    return {j.at("id").get<std::string>(), j.at("created").get<std::string>(),
            j.at("ledger_position").get<std::size_t>(), j.at("ledger_hash").get<std::string>()};
}

}  // namespace

nlohmann::json to_json(const Checkpoint& c) {
    return {{"id", c.id}, {"created", c.created}, {"ledger_position", c.ledger_position}, {"ledger_hash", c.ledger_hash}};
}

Checkpoint create_checkpoint(const fs::path& root, const std::string& id, Clock& clock) {
    if (!valid_id(id)) throw config_error("invalid checkpoint id '" + id + "'");
    auto dir = checkpoint_dir(root, id);
    if (fs::exists(dir)) throw config_error("checkpoint '" + id + "' already exists");

    auto events = read_events(root);
    Checkpoint cp{id, clock.now(), events.size(), events.empty() ? std::string("0000000000000000") : events.back().hash};

    auto tmp = root / "checkpoints" / (".tmp-" + id);
    fs::remove_all(tmp);
    try {
        copy_workspace(root, tmp / "workspace");
        copy_ledger(root / "ledger", tmp / "ledger");
        write_file_atomic(tmp / "checkpoint.json", to_json(cp).dump(2) + "\n");
        fs::rename(tmp, dir);
    } catch (...) {
        fs::remove_all(tmp);
        throw;
    }
    return cp;
}

Checkpoint load_checkpoint(const fs::path& root, const std::string& id) {
    if (!valid_id(id)) throw config_error("invalid checkpoint id '" + id + "'");
    auto dir = checkpoint_dir(root, id);
    auto meta = try_read_file(dir / "checkpoint.json");
    if (!meta) throw not_found_error("no checkpoint '" + id + "'");
    if (!fs::is_directory(dir / "workspace")) throw infra_error("checkpoint '" + id + "' has no workspace snapshot");
    Checkpoint cp;
    try {
        cp = checkpoint_from_json(nlohmann::json::parse(*meta));
    } catch (const nlohmann::json::exception& e) {
        throw infra_error("checkpoint '" + id + "' metadata is corrupt: " + e.what());
    }
    auto events = read_events(dir);
    auto hash = events.empty() ? std::string("0000000000000000") : events.back().hash;
    if (events.size() != cp.ledger_position || hash != cp.ledger_hash) {
        throw infra_error("checkpoint '" + id + "' ledger does not match its metadata");
    }
    return cp;
}

std::vector<Checkpoint> list_checkpoints(const fs::path& root) {
    std::vector<Checkpoint> out;
    auto dir = root / "checkpoints";
    if (!fs::is_directory(dir)) return out;
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(dir)) {
        auto name = e.path().filename().string();
        if (e.is_directory() && !is_staging(name) && fs::exists(e.path() / "checkpoint.json")) ids.push_back(name);
    }
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) out.push_back(load_checkpoint(root, id));
    return out;
}

void restore_checkpoint(const fs::path& root, const std::string& id, const fs::path& target) {
    auto cp = load_checkpoint(root, id);
    auto dir = checkpoint_dir(root, id);

    std::error_code ec;
    bool in_place = fs::exists(target) && fs::equivalent(root, target, ec);
    if (!in_place) {
        if (fs::exists(target) && !fs::is_empty(target)) {
            throw config_error("branch target " + target.string() + " is not empty");
        }
        auto staging = target.parent_path() / (".tmp-branch-" + target.filename().string());
        fs::remove_all(staging);
        try {
            copy_tree(dir / "workspace", staging);
            copy_ledger(dir / "ledger", staging / "ledger");
            copy_tree(root / "checkpoints", staging / "checkpoints");
            fs::remove_all(staging / "checkpoints" / (".tmp-" + id));
            if (fs::exists(target)) fs::remove(target);
            fs::rename(staging, target);
        } catch (...) {
            fs::remove_all(staging);
            throw;
        }
        return;
    }

    auto staging = root / (".restore-" + id);
    fs::remove_all(staging);
    try {
        copy_tree(dir / "workspace", staging);
        copy_ledger(dir / "ledger", staging / "ledger");
        auto abandoned = staging / "ledger" / "abandoned";
        if (fs::exists(root / "ledger" / "abandoned")) copy_tree(root / "ledger" / "abandoned", abandoned);
        auto current = root / "ledger" / "events.ndjson";
        if (fs::exists(current)) {
            fs::create_directories(abandoned);
            std::size_t n = 1;
            while (fs::exists(abandoned / (std::to_string(n) + ".ndjson"))) ++n;
            fs::copy_file(current, abandoned / (std::to_string(n) + ".ndjson"));
        }
    } catch (...) {
        fs::remove_all(staging);
        throw;
    }

    for (const auto& e : fs::directory_iterator(root)) {
        auto name = e.path().filename().string();
        if (name == "checkpoints" || name == ".git" || e.path() == staging) continue;
        fs::remove_all(e.path());
    }
    for (const auto& e : fs::directory_iterator(staging)) fs::rename(e.path(), root / e.path().filename());
    fs::remove_all(staging);
    (void)cp;
}

}  // namespace archon
