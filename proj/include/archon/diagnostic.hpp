#pragma once

#include "archon/lexer.hpp"

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace archon {

enum class Severity { error, warning, info };
enum class DiagnosticKind { parse, proof_failure, placeholder, unknown_reference, timeout, backend_failure };

struct Diagnostic {
    std::string file;
    Span span;
    Severity severity = Severity::error;
    DiagnosticKind kind = DiagnosticKind::parse;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

std::string_view to_string(Severity s);
std::string_view to_string(DiagnosticKind k);
Severity severity_from_string(std::string_view s);
DiagnosticKind diagnostic_kind_from_string(std::string_view s);

/// Orders by (file, span), then severity and message for a total order.
bool diagnostic_less(const Diagnostic& a, const Diagnostic& b);

void to_json(nlohmann::json& j, const Span& s);
void from_json(const nlohmann::json& j, Span& s);
void to_json(nlohmann::json& j, const Diagnostic& d);
void from_json(const nlohmann::json& j, Diagnostic& d);

}  // namespace archon
