#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "pqlab/config.hpp"

namespace pqlab::cli {

enum ExitCode { kOk = 0, kUsage = 1, kModuleError = 2, kInvariantViolation = 3 };

/// Bad flags or config contents detected by the tool itself.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  ExperimentConfig cfg;
  std::filesystem::path out_dir = ".";
  bool quiet = false;
};

/// Runs cfg.command, writes its artifacts under out_dir and prints one summary line.
int run_command(const Context& ctx);

}  // namespace pqlab::cli
