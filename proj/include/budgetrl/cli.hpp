// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace budgetrl {

// Full command-line front end: parses `args` (program name excluded),
// dispatches to one of construct / score / train-toy / report, and maps
// failures to exit codes (0 success, 2 validation, 3 runtime, 4 I/O) with a
// one-line machine-readable error JSON on stderr. The default config path
// comes from --config, falling back to the BUDGETRL_CONFIG environment
// variable, falling back to built-in defaults.
int run_cli(std::vector<std::string> args);

}  // namespace budgetrl
