#include "archon/diagnostic.hpp"

#include "archon/error.hpp"

#include <tuple>

namespace archon {

std::string_view to_string(Severity s) {
    switch (s) {
    case Severity::error: return "error";
    case Severity::warning: return "warning";
    case Severity::info: return "info";
    }
    return "info";
}

std::string_view to_string(DiagnosticKind k) {
    switch (k) {
    case DiagnosticKind::parse: return "parse";
    case DiagnosticKind::proof_failure: return "proof_failure";
    case DiagnosticKind::placeholder: return "placeholder";
    case DiagnosticKind::unknown_reference: return "unknown_reference";
    case DiagnosticKind::timeout: return "timeout";
    case DiagnosticKind::backend_failure: return "backend_failure";
    }
    return "parse";
}

Severity severity_from_string(std::string_view s) {
    if (s == "error") return Severity::error;
    if (s == "warning") return Severity::warning;
    if (s == "info") return Severity::info;
    throw config_error("unknown severity '" + std::string(s) + "'");
}

DiagnosticKind diagnostic_kind_from_string(std::string_view s) {
    for (auto k : {DiagnosticKind::parse, DiagnosticKind::proof_failure, DiagnosticKind::placeholder,
                   DiagnosticKind::unknown_reference, DiagnosticKind::timeout, DiagnosticKind::backend_failure}) {
        if (to_string(k) == s) return k;
    }
    throw config_error("unknown diagnostic kind '" + std::string(s) + "'");
}

bool diagnostic_less(const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.file, a.span, a.severity, a.kind, a.message) <
           std::tie(b.file, b.span, b.severity, b.kind, b.message);
}

void to_json(nlohmann::json& j, const Span& s) {
    j = nlohmann::json::array({s.start.line, s.start.col, s.end.line, s.end.col});
}

void from_json(const nlohmann::json& j, Span& s) {
    s.start = {j.at(0).get<int>(), j.at(1).get<int>()};
    s.end = {j.at(2).get<int>(), j.at(3).get<int>()};
}

void to_json(nlohmann::json& j, const Diagnostic& d) {
    j = {{"file", d.file},
         {"span", d.span},
         {"severity", to_string(d.severity)},
         {"kind", to_string(d.kind)},
         {"message", d.message}};
}

void from_json(const nlohmann::json& j, Diagnostic& d) {
    d.file = j.at("file").get<std::string>();
    d.span = j.at("span").get<Span>();
    d.severity = severity_from_string(j.at("severity").get<std::string>());
    d.kind = diagnostic_kind_from_string(j.at("kind").get<std::string>());
    d.message = j.at("message").get<std::string>();
}

}  // namespace archon
