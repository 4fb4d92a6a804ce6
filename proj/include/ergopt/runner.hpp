#pragma once

#include <exception>
#include <string>

#include "ergopt/config.hpp"

namespace ergopt {

struct RunOptions {
  std::string out_dir;      // overrides output.dir when non-empty
  bool emit_cycle = false;  // oracle: include the arg-max cycle cells
};

// 2 for config/input errors, 1 for computational failures.
int exit_code_for(const std::exception& e);

// Dispatches the configured command and writes its artifacts; returns the
// process exit code and reports failures on standard error.
int run(const RunConfig& cfg, const RunOptions& opt = {});

}  // namespace ergopt
