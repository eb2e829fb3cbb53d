#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace robust_t::cli {

// Exit status: 0 success, 2 a verdict or hypothesis failed, 1 any other error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitHypothesis = 2;

// Runs one command line (args excludes the program name). Reports go to `out`
// or to the --out file; diagnostics are JSON objects {code, message, context}
// written to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robust_t::cli
