#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covdecomp {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2 };

/// Entry point behind the `covdecomp` binary. args[0] is the program name.
/// Subcommands: synth, sample, decompose, check, lbp, sweep.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace covdecomp
