#pragma once

#include <string>

#include "cli_config.hpp"

namespace jdcli {

// Subcommand drivers. Each validates the config, computes through the
// shared library, writes the CSV/JSON (and optional SVG) artifacts, and
// returns the process exit code: 0 success, 1 error, 2 estimator sentinel
// (nothing survived pruning / empty matrix).
int run_tree(RunConfig cfg);
int run_mcmullen(RunConfig cfg);
int run_pullback(RunConfig cfg);
int run_dimension(RunConfig cfg);
int run_diagnose(RunConfig cfg);
int run_cache(const std::string& action, RunConfig cfg);

}  // namespace jdcli
