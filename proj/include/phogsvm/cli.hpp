#pragma once

#include <ostream>

namespace phogsvm::cli {

/// Exit codes: 0 success, 1 validation error, 2 runtime error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Built-in analytic example suite; prints one PASS/FAIL line per check and
/// returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace phogsvm::cli
