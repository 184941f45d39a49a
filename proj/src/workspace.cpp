#include "archon/workspace.hpp"

#include "archon/error.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>

namespace archon {

std::optional<Dialect> dialect_for_path(std::string_view path) {
    auto ends = [&](std::string_view ext) {
        return path.size() > ext.size() && path.substr(path.size() - ext.size()) == ext;
    };
    if (ends(kToyExtension)) return Dialect::toy;
    if (ends(kExternalExtension)) return Dialect::external;
    return std::nullopt;
}

std::string_view to_string(DeclKind k) {
    switch (k) {
    case DeclKind::definition: return "definition";
    case DeclKind::theorem: return "theorem";
    case DeclKind::import_directive: return "import";
    }
    return "theorem";
}

std::string_view to_string(ProofState s) {
    switch (s) {
    case ProofState::complete: return "complete";
    case ProofState::placeholder: return "placeholder";
    case ProofState::axiom_dependent: return "axiom-dependent";
    }
    return "complete";
}

std::string_view to_string(ObligationStatus s) {
    switch (s) {
    case ObligationStatus::open: return "open";
    case ObligationStatus::in_progress: return "in_progress";
    case ObligationStatus::closed: return "closed";
    case ObligationStatus::deferred: return "deferred";
    }
    return "open";
}

ObligationStatus obligation_status_from_string(std::string_view s) {
    for (auto st : {ObligationStatus::open, ObligationStatus::in_progress, ObligationStatus::closed,
                    ObligationStatus::deferred}) {
        if (to_string(st) == s) return st;
    }
    throw config_error("unknown obligation status '" + std::string(s) + "'");
}

std::string obligation_id(std::string_view file, std::string_view declaration) {
    return std::string(file) + "::" + std::string(declaration);
}

std::vector<std::string> Declaration::statement_tokens() const {
    std::vector<std::string> out;
    out.reserve(statement.size());
    for (const auto& t : statement) out.push_back(t.text);
    return out;
}

std::string Declaration::statement_text() const {
    std::string out;
    for (const auto& t : statement) {
        if (!out.empty()) out += ' ';
        out += t.text;
    }
    return out;
}

// ---- ProjectState queries ------------------------------------------------------

std::vector<const Declaration*> ProjectState::declarations_in(std::string_view file) const {
    std::vector<const Declaration*> out;
    for (const auto& [id, d] : declarations) {
        if (d.file == file) out.push_back(&d);
    }
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->ordinal < b->ordinal; });
    return out;
}

const Declaration* ProjectState::find_declaration(std::string_view file, std::string_view name) const {
    auto it = declarations.find(obligation_id(file, name));
    return it == declarations.end() ? nullptr : &it->second;
}

std::vector<const Obligation*> ProjectState::open_obligations() const {
    std::vector<const Obligation*> out;
    for (const auto& [id, ob] : obligations) {
        if (ob.is_open()) out.push_back(&ob);
    }
    return out;
}

std::vector<Diagnostic> ProjectState::all_diagnostics() const {
    std::vector<Diagnostic> out;
    for (const auto& [file, diags] : diagnostics) out.insert(out.end(), diags.begin(), diags.end());
    std::sort(out.begin(), out.end(), diagnostic_less);
    return out;
}

std::set<std::string> ProjectState::transitive_imports(const std::string& file) const {
    std::set<std::string> seen;
    std::vector<std::string> stack{file};
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        auto it = import_graph.find(cur);
        if (it == import_graph.end()) continue;
        for (const auto& next : it->second) {
            if (next != file && seen.insert(next).second) stack.push_back(next);
        }
    }
    return seen;
}

std::vector<std::string> ProjectState::topological_files() const {
    // Kahn's algorithm over imported -> importer, smallest path first.
    std::map<std::string, int> pending;
    std::map<std::string, std::vector<std::string>> importers;
    for (const auto& [path, f] : files) pending[path] = 0;
    for (const auto& [from, tos] : import_graph) {
        for (const auto& to : tos) {
            if (!pending.count(from) || !pending.count(to)) continue;
            ++pending[from];
            importers[to].push_back(from);
        }
    }
    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [path, n] : pending) {
        if (n == 0) ready.push(path);
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        auto cur = ready.top();
        ready.pop();
        order.push_back(cur);
        for (const auto& imp : importers[cur]) {
            if (--pending[imp] == 0) ready.push(imp);
        }
    }
    return order;
}

// ---- parsing -----------------------------------------------------------------------

namespace {

Diagnostic parse_diag(const std::string& file, Span span, std::string message) {
    return {file, span, Severity::error, DiagnosticKind::parse, std::move(message)};
}

Span cover(const std::vector<Token>& toks, std::size_t b, std::size_t e) {
    if (b >= e) return {};
    return {toks[b].span.start, toks[e - 1].span.end};
}

bool contains_ident(const std::vector<Token>& toks, std::initializer_list<std::string_view> names) {
    for (const auto& t : toks) {
        if (t.kind != TokenKind::identifier) continue;
        for (auto n : names) {
            if (t.text == n) return true;
        }
    }
    return false;
}

std::string synthetic_name(std::string_view what, const Token& at) {
    return "_" + std::string(what) + "_L" + std::to_string(at.span.start.line);
}

void finalize(ParsedFile& out, const std::string& file) {
    std::set<std::string> seen;
    int ordinal = 0;
    for (auto& d : out.declarations) {
        d.ordinal = ordinal++;
        if (d.kind == DeclKind::import_directive) continue;
        if (!seen.insert(d.name).second) {
            out.diagnostics.push_back(parse_diag(file, d.span, "duplicate declaration name '" + d.name + "'"));
            d.parse_error = "duplicate declaration name";
            d.name += "@L" + std::to_string(d.span.start.line);
            seen.insert(d.name);
        }
    }
}

ParsedFile parse_toy(const std::string& file, std::string_view content) {
    ParsedFile out;
    auto lexed = lex(content, Dialect::toy);
    for (const auto& e : lexed.errors) out.diagnostics.push_back(parse_diag(file, {e.at, e.at}, e.message));
    const auto& toks = lexed.tokens;

    auto is_keyword = [](const Token& t) {
        return t.kind == TokenKind::identifier && (t.text == "theorem" || t.text == "def" || t.text == "import");
    };

    std::size_t i = 0;
    if (!toks.empty() && !is_keyword(toks[0])) {
        std::size_t j = 0;
        while (j < toks.size() && !is_keyword(toks[j])) ++j;
        out.diagnostics.push_back(parse_diag(file, cover(toks, 0, j), "tokens outside any declaration"));
        i = j;
    }
    while (i < toks.size()) {
        std::size_t j = i + 1;
        while (j < toks.size() && !is_keyword(toks[j])) ++j;
        const Token& kw = toks[i];
        Declaration d;
        d.file = file;
        d.span = cover(toks, i, j);

        auto fail = [&](std::string why) {
            d.parse_error = why;
            out.diagnostics.push_back(parse_diag(file, d.span, std::move(why)));
        };

        bool named = i + 1 < j && toks[i + 1].kind == TokenKind::identifier;
        d.name = named ? toks[i + 1].text : synthetic_name("unparseable", kw);

        if (kw.text == "import") {
            d.kind = DeclKind::import_directive;
            if (!named) {
                fail("import expects a module name");
            } else if (i + 2 != j) {
                fail("unexpected tokens after import");
            }
        } else {
            d.kind = kw.text == "theorem" ? DeclKind::theorem : DeclKind::definition;
            std::size_t assign = j;
            for (std::size_t k = i + 1; k < j; ++k) {
                if (toks[k].is(":=")) {
                    assign = k;
                    break;
                }
            }
            std::size_t stmt_begin = i + 2;
            if (d.kind == DeclKind::theorem && stmt_begin < j && toks[stmt_begin].is(":")) ++stmt_begin;
            if (assign < j) d.proof.assign(toks.begin() + assign + 1, toks.begin() + j);
            if (d.kind == DeclKind::theorem) {
                if (stmt_begin < assign) d.statement.assign(toks.begin() + stmt_begin, toks.begin() + assign);
            } else if (stmt_begin < j) {
                d.statement.assign(toks.begin() + stmt_begin, toks.begin() + j);
            }

            if (!named) {
                fail(std::string(kw.text) + " expects a name");
            } else if (d.kind == DeclKind::theorem && (i + 2 >= j || !toks[i + 2].is(":"))) {
                fail("expected ':' after theorem name");
            } else if (assign == j) {
                fail("expected ':='");
            } else if (d.kind == DeclKind::theorem && stmt_begin >= assign) {
                fail("empty statement");
            } else if (d.proof.empty()) {
                fail("missing proof");
            }
        }

        if (contains_ident(d.proof, {"sorry"})) {
            d.proof_state = ProofState::placeholder;
        } else if (contains_ident(d.proof, {"by_axiom"})) {
            d.proof_state = ProofState::axiom_dependent;
        }
        out.declarations.push_back(std::move(d));
        i = j;
    }
    finalize(out, file);
    return out;
}

bool lean_decl_keyword(std::string_view t, DeclKind& kind) {
    static const std::set<std::string_view> theorems = {"theorem", "lemma", "axiom"};
    static const std::set<std::string_view> defs = {"def",       "abbrev", "instance", "example",  "structure",
                                                    "inductive", "class",  "opaque",   "noncomputable_def"};
    if (theorems.count(t)) {
        kind = DeclKind::theorem;
        return true;
    }
    if (defs.count(t)) {
        kind = DeclKind::definition;
        return true;
    }
    return false;
}

bool lean_modifier(std::string_view t) {
    return t == "private" || t == "protected" || t == "noncomputable" || t == "partial" || t == "nonrec" ||
           t == "unsafe";
}

ParsedFile parse_lean(const std::string& file, std::string_view content) {
    ParsedFile out;
    auto lexed = lex(content, Dialect::external);
    for (const auto& e : lexed.errors) out.diagnostics.push_back(parse_diag(file, {e.at, e.at}, e.message));
    const auto& toks = lexed.tokens;

    // Commands start in column 1; a declaration runs until the next column-1 token.
    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k < toks.size(); ++k) {
        if (toks[k].span.start.col == 1) starts.push_back(k);
    }
    starts.push_back(toks.size());

    for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
        std::size_t b = starts[s], e = starts[s + 1];
        std::size_t k = b;
        // skip attributes `@[ ... ]` and modifiers
        while (k < e) {
            if (toks[k].is("@") && k + 1 < e && toks[k + 1].is("[")) {
                int depth = 0;
                for (++k; k < e; ++k) {
                    if (toks[k].is("[")) ++depth;
                    if (toks[k].is("]") && --depth == 0) break;
                }
                ++k;
            } else if (toks[k].kind == TokenKind::identifier && lean_modifier(toks[k].text)) {
                ++k;
            } else {
                break;
            }
        }
        if (k >= e) continue;
        const Token& kw = toks[k];
        if (kw.is("import")) {
            Declaration d;
            d.file = file;
            d.kind = DeclKind::import_directive;
            d.span = cover(toks, b, e);
            if (k + 1 < e && toks[k + 1].kind == TokenKind::identifier) {
                d.name = toks[k + 1].text;
            } else {
                d.name = synthetic_name("unparseable", kw);
                d.parse_error = "import expects a module name";
                out.diagnostics.push_back(parse_diag(file, d.span, *d.parse_error));
            }
            out.declarations.push_back(std::move(d));
            continue;
        }
        DeclKind kind;
        if (kw.kind != TokenKind::identifier || !lean_decl_keyword(kw.text, kind)) continue;

        Declaration d;
        d.file = file;
        d.kind = kind;
        d.span = cover(toks, b, e);
        std::size_t name_at = k + 1;
        bool named = name_at < e && toks[name_at].kind == TokenKind::identifier;
        d.name = named ? toks[name_at].text : synthetic_name(kw.text, kw);
        std::size_t stmt_begin = named ? name_at + 1 : name_at;

        int depth = 0;
        std::size_t term = e;
        for (std::size_t m = stmt_begin; m < e; ++m) {
            const auto& t = toks[m];
            if (t.kind == TokenKind::op && (t.text == "(" || t.text == "[" || t.text == "{" || t.text == "⟨")) ++depth;
            if (t.kind == TokenKind::op && (t.text == ")" || t.text == "]" || t.text == "}" || t.text == "⟩")) --depth;
            if (depth == 0 && (t.is(":=") || t.is("where") || t.is("|"))) {
                term = m;
                break;
            }
        }
        if (stmt_begin < term && toks[stmt_begin].is(":")) ++stmt_begin;
        if (stmt_begin < term) d.statement.assign(toks.begin() + stmt_begin, toks.begin() + term);
        if (term < e) d.proof.assign(toks.begin() + (toks[term].is(":=") ? term + 1 : term), toks.begin() + e);

        if (kw.text == "axiom") {
            d.proof_state = ProofState::axiom_dependent;
        } else if (contains_ident(d.proof, {"sorry", "admit"})) {
            d.proof_state = ProofState::placeholder;
        }
        if (kw.text == "theorem" || kw.text == "lemma") {
            if (!named) {
                d.parse_error = "theorem expects a name";
            } else if (term == e) {
                d.parse_error = "expected ':='";
            }
            if (d.parse_error) out.diagnostics.push_back(parse_diag(file, d.span, *d.parse_error));
        }
        out.declarations.push_back(std::move(d));
    }
    finalize(out, file);
    return out;
}

std::string module_to_path(std::string_view module) {
    std::string p(module);
    std::replace(p.begin(), p.end(), '.', '/');
    return p;
}

// Re-derives declarations, graph and per-file diagnostics from the file set.
// Obligation statuses are carried over from `previous` where the identity persists.
void derive(ProjectState& st, const std::map<std::string, std::vector<Diagnostic>>& io_diagnostics) {
    st.declarations.clear();
    st.import_graph.clear();
    st.diagnostics = io_diagnostics;

    std::map<std::string, std::vector<const Declaration*>> imports;
    std::vector<Declaration> all;
    for (const auto& [path, f] : st.files) {
        auto parsed = parse_source(path, f.content, f.dialect);
        auto& diags = st.diagnostics[path];
        diags.insert(diags.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
        for (auto& d : parsed.declarations) st.declarations.emplace(d.id(), std::move(d));
        st.import_graph[path];
    }
    for (const auto& [id, d] : st.declarations) {
        if (d.kind == DeclKind::import_directive && !d.parse_error) imports[d.file].push_back(&d);
    }

    auto reaches = [&](const std::string& from, const std::string& target) {
        std::set<std::string> seen{from};
        std::vector<std::string> stack{from};
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            if (cur == target) return true;
            for (const auto& n : st.import_graph[cur]) {
                if (seen.insert(n).second) stack.push_back(n);
            }
        }
        return false;
    };

    for (auto& [path, decls] : imports) {
        std::sort(decls.begin(), decls.end(), [](auto* a, auto* b) { return a->ordinal < b->ordinal; });
        const auto& f = st.files.at(path);
        for (const auto* d : decls) {
            std::string rel = module_to_path(d->name);
            std::string ext(f.dialect == Dialect::toy ? kToyExtension : kExternalExtension);
            std::optional<std::string> target;
            for (const auto& cand : {"src/" + rel + ext, rel + ext}) {
                if (st.files.count(cand)) {
                    target = cand;
                    break;
                }
            }
            if (!target) {
                // External-dialect imports may name library modules outside the workspace.
                if (f.dialect == Dialect::toy) {
                    st.diagnostics[path].push_back({path, d->span, Severity::error, DiagnosticKind::unknown_reference,
                                                    "unresolved import '" + d->name + "'"});
                }
                continue;
            }
            if (*target == path || reaches(*target, path)) {
                st.diagnostics[path].push_back(parse_diag(path, d->span, "import cycle through '" + d->name + "'"));
                continue;
            }
            st.import_graph[path].insert(*target);
        }
    }
    for (auto it = st.diagnostics.begin(); it != st.diagnostics.end();) {
        std::sort(it->second.begin(), it->second.end(), diagnostic_less);
        it = it->second.empty() ? st.diagnostics.erase(it) : std::next(it);
    }
}

void sync_obligations(ProjectState& st, const std::map<std::string, Obligation>& previous,
                      const std::string& session) {
    st.obligations = previous;
    for (auto& [id, ob] : st.obligations) {
        auto it = st.declarations.find(id);
        if (it == st.declarations.end()) {
            if (ob.status != ObligationStatus::closed) {
                ob.status = ObligationStatus::closed;
                ob.history.push_back({session, "refactored"});
            }
            continue;
        }
        if (it->second.proof_state == ProofState::placeholder && ob.status == ObligationStatus::closed) {
            ob.status = ObligationStatus::open;
        }
    }
    for (const auto& [id, d] : st.declarations) {
        if (d.kind == DeclKind::import_directive || d.proof_state != ProofState::placeholder) continue;
        if (st.obligations.count(id)) continue;
        st.obligations.emplace(id, Obligation{id, d.file, d.name, ObligationStatus::open, {}});
    }
}

}  // namespace

ParsedFile parse_source(const std::string& path, std::string_view content, Dialect dialect) {
    return dialect == Dialect::toy ? parse_toy(path, content) : parse_lean(path, content);
}

ProjectState build_state(std::string root, std::map<std::string, SourceFile> files,
                         std::map<std::string, std::vector<Diagnostic>> io_diagnostics) {
    ProjectState st;
    st.root = std::move(root);
    st.files = std::move(files);
    derive(st, io_diagnostics);
    sync_obligations(st, {}, "");
    return st;
}

ProjectState scan_project(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw infra_error("workspace root is not a readable directory: " + root.string());

    std::map<std::string, SourceFile> files;
    std::map<std::string, std::vector<Diagnostic>> io_diags;
    auto opts = fs::directory_options::skip_permission_denied;
    for (auto it = fs::recursive_directory_iterator(root, opts, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        auto rel = fs::relative(it->path(), root, ec).generic_string();
        auto name = it->path().filename().string();
        if (it->is_directory(ec)) {
            bool top = it.depth() == 0;
            if ((top && reserved_dirs().count(name)) || starts_with(name, ".")) it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file(ec)) continue;
        auto dialect = dialect_for_path(rel);
        if (!dialect) continue;
        auto content = try_read_file(it->path());
        if (!content) {
            io_diags[rel].push_back({rel, {}, Severity::error, DiagnosticKind::backend_failure, "unreadable file"});
            continue;
        }
        files.emplace(rel, SourceFile{rel, std::move(*content), *dialect, 0});
    }
    if (ec) throw infra_error("scanning " + root.string() + ": " + ec.message());
    return build_state(fs::absolute(root).lexically_normal().generic_string(), std::move(files), std::move(io_diags));
}

void write_state(const ProjectState& state, const fs::path& root) {
    for (const auto& [path, f] : state.files) write_file_atomic(root / path, f.content);
}

// ---- mutation ----------------------------------------------------------------------------

bool scope_covers(std::string_view scope, std::string_view path) {
    if (scope == path) return true;
    return !scope.empty() && scope.back() == '/' && starts_with(path, scope);
}

bool scopes_overlap(std::string_view a, std::string_view b) { return scope_covers(a, b) || scope_covers(b, a); }

std::optional<MutationToken> FileLocks::acquire(const std::string& scope, const std::string& session) {
    std::lock_guard lock(mutex_);
    for (const auto& [serial, t] : held_) {
        if (scopes_overlap(t.scope, scope)) return std::nullopt;
    }
    MutationToken token{scope, session, next_serial_++};
    held_.emplace(token.serial, token);
    return token;
}

void FileLocks::release(const MutationToken& token) {
    std::lock_guard lock(mutex_);
    held_.erase(token.serial);
}

bool FileLocks::valid_for(const MutationToken& token, std::string_view path) const {
    std::lock_guard lock(mutex_);
    auto it = held_.find(token.serial);
    return it != held_.end() && it->second.scope == token.scope && it->second.session == token.session &&
           scope_covers(token.scope, path);
}

std::size_t FileLocks::held() const {
    std::lock_guard lock(mutex_);
    return held_.size();
}

ProjectState apply_edit(const ProjectState& state, const Edit& edit, const MutationToken& token,
                        const FileLocks& locks) {
    auto rel = confine_relative(edit.path);
    if (!rel) throw contract_error("edit outside workspace root: " + edit.path);
    auto first = rel->substr(0, rel->find('/'));
    if (rel->find('/') != std::string::npos && reserved_dirs().count(first)) {
        throw contract_error("edit targets reserved directory: " + *rel);
    }
    auto dialect = dialect_for_path(*rel);
    if (!dialect) throw contract_error("not a proof source file: " + *rel);
    if (!locks.valid_for(token, *rel)) throw contract_error("no mutation token for " + *rel);

    ProjectState next = state;
    auto& f = next.files[*rel];
    f.path = *rel;
    f.dialect = *dialect;
    f.content = edit.content;
    ++f.version;

    std::map<std::string, std::vector<Diagnostic>> io;
    for (const auto& [path, diags] : state.diagnostics) {
        for (const auto& d : diags) {
            if (d.kind == DiagnosticKind::backend_failure && path != *rel) io[path].push_back(d);
        }
    }
    derive(next, io);
    sync_obligations(next, state.obligations, edit.session);
    return next;
}

// ---- partition -----------------------------------------------------------------------------

std::vector<ObligationGroup> dependency_partition(const ProjectState& state) {
    std::vector<std::string> paths;
    std::map<std::string, std::size_t> index;
    for (const auto& [p, f] : state.files) {
        index[p] = paths.size();
        paths.push_back(p);
    }
    std::vector<std::size_t> parent(paths.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (const auto& [from, tos] : state.import_graph) {
        for (const auto& to : tos) {
            if (!index.count(from) || !index.count(to)) continue;
            auto a = find(index[from]), b = find(index[to]);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::map<std::size_t, ObligationGroup> groups;
    for (const auto* ob : state.open_obligations()) {
        auto it = index.find(ob->file);
        if (it == index.end()) continue;
        groups[find(it->second)].obligations.push_back(ob->id);
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
        auto g = groups.find(find(i));
        if (g != groups.end()) g->second.files.push_back(paths[i]);
    }
    std::vector<ObligationGroup> out;
    for (auto& [root, g] : groups) {
        std::sort(g.obligations.begin(), g.obligations.end());
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.obligations.front() < b.obligations.front(); });
    return out;
}

// ---- serialization ---------------------------------------------------------------------------

nlohmann::json to_json(const ProjectState& state) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [p, f] : state.files) {
        files.push_back({{"path", p}, {"dialect", to_string(f.dialect)}, {"version", f.version}});
    }
    nlohmann::json decls = nlohmann::json::array();
    for (const auto& [id, d] : state.declarations) {
        nlohmann::json j = {{"id", id},
                            {"name", d.name},
                            {"file", d.file},
                            {"kind", to_string(d.kind)},
                            {"statement", d.statement_text()},
                            {"proof_state", to_string(d.proof_state)},
                            {"span", d.span}};
        if (d.parse_error) j["parse_error"] = *d.parse_error;
        decls.push_back(std::move(j));
    }
    nlohmann::json obs = nlohmann::json::array();
    for (const auto& [id, ob] : state.obligations) {
        nlohmann::json hist = nlohmann::json::array();
        for (const auto& h : ob.history) hist.push_back({{"session", h.session}, {"outcome", h.outcome}});
        obs.push_back({{"id", id},
                       {"file", ob.file},
                       {"declaration", ob.declaration},
                       {"status", to_string(ob.status)},
                       {"attempts", ob.attempts()},
                       {"history", hist}});
    }
    nlohmann::json graph = nlohmann::json::object();
    for (const auto& [from, tos] : state.import_graph) graph[from] = tos;
    return {{"root", state.root},
            {"files", files},
            {"declarations", decls},
            {"obligations", obs},
            {"import_graph", graph},
            {"diagnostics", state.all_diagnostics()}};
}

// ---- Workspace --------------------------------------------------------------------------------

Workspace::Workspace(fs::path root, ProjectState state) : root_(std::move(root)), state_(std::move(state)) {}

ProjectState Workspace::snapshot() const {
    std::lock_guard lock(mutex_);
    return state_;
}

void Workspace::replace(ProjectState state) {
    std::lock_guard lock(mutex_);
    state_ = std::move(state);
}

void Workspace::edit(const Edit& e, const MutationToken& token) {
    std::lock_guard lock(mutex_);
    auto next = apply_edit(state_, e, token, locks_);
    auto rel = *confine_relative(e.path);
    write_file_atomic(root_ / rel, next.files.at(rel).content);
    state_ = std::move(next);
}

}  // namespace archon
