#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cidx::cli {

/// Process exit codes; stable across releases.
enum class ExitStatus : int {
    success = 0,
    check_failed = 1,  // verification or validation failure
    usage = 2,
    data_error = 3,
};

/// Runs one command line (without the program name). Results go to `out`,
/// every diagnostic to `err`.
ExitStatus run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cidx::cli
