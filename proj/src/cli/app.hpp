#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "scenario.hpp"

namespace latdiff::cli {

enum ExitCode { kOk = 0, kInputError = 1, kValidationFailure = 2 };

struct RunOptions {
  std::string out;  // overrides the scenario's output directory
  int threads = 0;  // overrides the scenario's thread count
  std::optional<double> threshold;
  bool svg = true;
};

// Executes one sub-command. Library errors propagate.
int run_command(const std::string& command, const Scenario& scenario, const RunOptions& options, std::ostream& out);

// Full command line, e.g. {"latdiff", "embed", "--scenario", "square.json"}.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace latdiff::cli
