#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jsr::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kError = 1, kInconclusive = 2 };

/// Runs the `jsr` command line. `args` excludes the program name. Human
/// output goes to `out`, diagnostics to `err`; a JSON report is written when
/// --out is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace jsr::cli
