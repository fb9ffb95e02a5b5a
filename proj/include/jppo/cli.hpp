#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jppo::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // replay mismatch or unexpected error
  kConfigError = 2,
  kNumericFailure = 3,
  kInfeasible = 4,
};

// Runs one subcommand (train, grid, compare, schedule, bep, calibrate, replay).
// Data goes to `out`; failures are reported on `err` as a JSON object
// {"error": <kind>, "message": ..., "key_path": ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jppo::cli
