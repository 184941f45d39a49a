#include "archon/agents.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace archon {

SkillDoc parse_skill(std::string_view text, SkillScope scope) {
    SkillDoc doc;
    doc.scope = scope;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = false;
    bool seen_header = false;
    std::string body;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (!seen_header && !header && t.empty()) continue;
        if (!seen_header && t == "---") {
            if (header) seen_header = true;
            header = !header;
            continue;
        }
        if (header) {
            auto colon = t.find(':');
            if (colon == std::string::npos) throw config_error("skill header line without ':': " + t);
            auto key = trim(t.substr(0, colon));
            auto value = trim(t.substr(colon + 1));
            if (key == "name") {
                doc.name = value;
            } else if (key == "trigger") {
                doc.trigger = value;
            } else if (key == "roles") {
                std::istringstream roles(value);
                std::string r;
                while (std::getline(roles, r, ',')) {
                    auto name = trim(r);
                    if (name.empty()) continue;
                    role_from_string(name);
                    doc.roles.insert(name);
                }
            } else {
                throw config_error("unknown skill header key '" + key + "'");
            }
            continue;
        }
        seen_header = true;
        body += line + "\n";
    }
    if (header) throw config_error("unterminated skill header");
    if (doc.name.empty()) throw config_error("skill without a name");
    doc.body = trim(body);
    return doc;
}

const std::vector<SkillDoc>& builtin_skills() {
    static const std::vector<SkillDoc> skills = [] {
        std::vector<SkillDoc> out;
        out.push_back(parse_skill(R"(---
name: minicheck-proofs
trigger: closing a MiniCheck obligation
roles: worker
---
A theorem states a ground equation over natural numbers. Close it with `refl` when both sides
evaluate to the same value, or with `by_lemma name` when an earlier theorem states exactly the
same equation. Never leave `sorry`, `by_axiom` or `unsafe_eval` in finished work. Run `run_check`
after every edit and fix reported errors before writing the summary.)",
                                  SkillScope::global));
        out.push_back(parse_skill(R"(---
name: decomposition
trigger: choosing the next wave of tasks
roles: plan
---
Emit one task per dependency group so that workers never share files. Reference a group with
`{"group": i}` or list `targets` and `scope` explicitly. Prefer the obligations that block others.
When the review reports a stall, change the approach instead of repeating it.)",
                                  SkillScope::global));
        out.push_back(parse_skill(R"(---
name: stall-review
trigger: reading recent sessions
roles: review
---
Compare what each recent session attempted with what it closed. Repeated failures with the same
diagnostics mean the current route is not working. Report facts; do not edit files.)",
                                  SkillScope::global));
        return out;
    }();
    return skills;
}

std::vector<SkillDoc> load_skills(const std::optional<fs::path>& project_dir) {
    std::map<std::string, SkillDoc> by_name;
    for (const auto& s : builtin_skills()) by_name[s.name] = s;
    if (project_dir && fs::is_directory(*project_dir)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(*project_dir)) {
            if (e.is_regular_file() && e.path().extension() == ".md") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            auto doc = parse_skill(read_file(f), SkillScope::project);
            by_name[doc.name] = std::move(doc);
        }
    }
    std::vector<SkillDoc> out;
    for (auto& [name, doc] : by_name) out.push_back(std::move(doc));
    return out;
}

std::vector<SkillDoc> skills_for(const std::vector<SkillDoc>& skills, Role role) {
    std::vector<SkillDoc> out;
    for (const auto& s : skills) {
        if (s.roles.empty() || s.roles.count(std::string(to_string(role)))) out.push_back(s);
    }
    return out;
}

}  // namespace archon
