#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lqcheck::cli {

enum ExitCode { kOk = 0, kNotEquivalent = 1, kUsage = 2, kType = 3, kSemantics = 4 };

// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Default tolerance, overridden by LQCHECK_EPS.
double default_eps();

}  // namespace lqcheck::cli
