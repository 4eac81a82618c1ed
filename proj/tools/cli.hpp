#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace lcvx::cli {

enum ExitCode : int { kOk = 0, kNotVerified = 1, kUsage = 2, kInternal = 3 };

struct CliConfig {
  std::string command;
  std::string builtin;
  std::string input;
  double tol_gap = 1e-7;
  double tol_feas = 1e-8;
  std::optional<double> epsilon;
  int samples = 100;
  std::uint64_t seed = 0;
  int grid = 2001;
  std::string format = "text";
  std::string output;
};

/// Parses argv and runs one command. Reports go to `out` (or --output);
/// diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lcvx::cli
