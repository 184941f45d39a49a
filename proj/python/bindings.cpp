#include "archon/cli.hpp"
#include "archon/gate.hpp"
#include "archon/ledger.hpp"
#include "archon/review.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace archon;

// Results cross the boundary as JSON text; the Python package decodes them.

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of the archon orchestrator";
    py::register_exception<Error>(m, "ArchonError", PyExc_RuntimeError);

    m.def("scan", [](const std::string& root) { return to_json(scan_project(root)).dump(); }, py::arg("root"));
    m.def(
        "check",
        [](const std::string& root) {
            auto config = load_config(root);
            py::gil_scoped_release release;
            return to_json(check(scan_project(root), config.checker), false).dump();
        },
        py::arg("root"));
    m.def(
        "verify",
        [](const std::string& root, bool record) {
            py::gil_scoped_release release;
            return to_json(verify_workspace(root, record)).dump();
        },
        py::arg("root"), py::arg("record") = false);
    m.def(
        "search",
        [](const std::string& corpus, const std::string& query, std::size_t k) {
            nlohmann::json out = nlohmann::json::array();
            for (const auto& h : StatementIndex::load(corpus).search(query, k)) {
                out.push_back({{"id", h.id}, {"statement", h.statement}, {"score", h.score}});
            }
            return out.dump();
        },
        py::arg("corpus"), py::arg("query"), py::arg("k") = 5);
    m.def(
        "review",
        [](const std::string& root) {
            auto config = load_config(root);
            ReviewPolicy policy{config.budgets.review_window, config.budgets.stall_threshold};
            return to_json(review_cycle(read_events(root), policy)).dump();
        },
        py::arg("root"));
    m.def("status", [](const std::string& root) { return workspace_status(root).dump(); }, py::arg("root"));
    m.def(
        "init",
        [](const std::string& root, std::optional<std::string> tmpl, bool force) { init_workspace(root, tmpl, force); },
        py::arg("root"), py::arg("template") = py::none(), py::arg("force") = false);
    m.def(
        "run",
        [](const std::string& root, bool replay, std::optional<std::string> stop_at, bool resume) {
            RunOptions opts;
            opts.replay = replay;
            opts.resume = resume;
            if (stop_at) opts.stop_at = phase_from_string(*stop_at);
            py::gil_scoped_release release;
            auto r = run_workspace(root, opts);
            nlohmann::json j{{"phase", std::string(to_string(r.phase))}, {"reason", r.reason}, {"plan_cycles", r.plan_cycles}};
            if (r.verdict) j["verdict"] = to_json(*r.verdict);
            if (r.review) j["review"] = to_json(*r.review);
            return j.dump();
        },
        py::arg("root"), py::arg("replay") = false, py::arg("stop_at") = py::none(), py::arg("resume") = false);
    m.def(
        "replay",
        [](const std::string& root, std::optional<std::string> scratch) {
            py::gil_scoped_release release;
            auto r = replay_workspace(root, scratch ? std::optional<fs::path>(*scratch) : std::nullopt);
            nlohmann::json j{{"identical", r.identical},
                             {"recorded_events", r.recorded_events},
                             {"replayed_events", r.replayed_events},
                             {"scratch", r.scratch.string()}};
            if (r.first_difference) j["first_difference"] = *r.first_difference;
            return j.dump();
        },
        py::arg("root"), py::arg("scratch") = py::none());
    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
