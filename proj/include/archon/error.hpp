#pragma once

#include <stdexcept>
#include <string>

namespace archon {

// Failure classes; the CLI maps each onto a stable exit code.
enum class ErrorKind {
    config,          // malformed or unknown configuration
    infrastructure,  // I/O, subprocess, provider transport
    contract,        // caller violated a precondition (scope, token, path)
    not_found,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error config_error(const std::string& what) { return {ErrorKind::config, what}; }
inline Error infra_error(const std::string& what) { return {ErrorKind::infrastructure, what}; }
inline Error contract_error(const std::string& what) { return {ErrorKind::contract, what}; }
inline Error not_found_error(const std::string& what) { return {ErrorKind::not_found, what}; }

}  // namespace archon
