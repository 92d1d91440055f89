#pragma once

#include <stdexcept>
#include <string>

namespace cidx {

enum class ErrorKind {
    syntax,             // malformed document or row
    semantic,           // well-formed but violates a tree or format rule
    missing_indicator,  // policy `fail` met an absent child
    no_data,            // nothing to aggregate beneath a node
    unknown_id,         // id not present in the active tree
    invalid_value,      // non-finite or out-of-range number, bad argument
    incomplete_coverage,
    duplicate,
    unknown_case,
    contract,           // caller broke a precondition
    io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every engine failure is reported through this type. `path` names the
/// offending location (tree path, node id or row) when there is one.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message, std::string path = {});

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& path() const noexcept { return path_; }

private:
    ErrorKind kind_;
    std::string path_;
};

}  // namespace cidx
