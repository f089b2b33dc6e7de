#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lrf::cli {

/// Exit statuses.
enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kData = 3, kNumeric = 4, kIo = 5 };

/// Runs one subcommand: train, synth, refine, eval, cv, inspect {mask|model}.
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace lrf::cli
