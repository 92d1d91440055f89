#include "cidx/error.hpp"

#include <utility>

namespace cidx {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::syntax: return "syntax error";
        case ErrorKind::semantic: return "semantic error";
        case ErrorKind::missing_indicator: return "missing indicator";
        case ErrorKind::no_data: return "no data beneath node";
        case ErrorKind::unknown_id: return "unknown id";
        case ErrorKind::invalid_value: return "invalid value";
        case ErrorKind::incomplete_coverage: return "incomplete coverage";
        case ErrorKind::duplicate: return "duplicate observation";
        case ErrorKind::unknown_case: return "unknown case";
        case ErrorKind::contract: return "contract violation";
        case ErrorKind::io: return "i/o error";
    }
    return "error";
}

Error::Error(ErrorKind kind, std::string message, std::string path)
    : std::runtime_error(std::move(message)), kind_(kind), path_(std::move(path)) {}

}  // namespace cidx
