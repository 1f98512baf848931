#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kpo/cli/config.hpp"
#include "kpo/task_runner.hpp"

namespace kpo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConverged = 3;

struct OutputFile {
  std::string path;  // empty: the main output stream
  std::string body;
};

// Everything a command produces, rendered but not yet written.
struct CommandResult {
  int exit_code = kExitOk;
  std::vector<OutputFile> files;  // main output first
  std::vector<std::string> warnings;
};

// Runs a validated config. Throws ConfigError or InvalidParameter for bad
// input; solver failures are reported through exit_code with whatever
// output could be produced.
CommandResult execute(const RunConfig& config, TaskRunner& runner);

// Full command line (without the program name). Returns the process exit
// code; data goes to `out` unless --out names a file.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kpo::cli
