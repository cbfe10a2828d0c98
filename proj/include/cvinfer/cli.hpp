#pragma once

#include <iosfwd>

namespace cvinfer {

inline constexpr const char* kToolVersion = "1.0.0";

/// Entry point of the cvinfer command line tool. Results go to `out` (or the
/// file named by --out), diagnostics to `err`.
///
/// Exit codes: 0 success; 1 computation error (a JSON error object is written
/// to `out`) and, for `infer test`, a rejected null; 2 usage error or missing
/// input file.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cvinfer
