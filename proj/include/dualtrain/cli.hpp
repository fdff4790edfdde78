// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace dualtrain::cli {

enum ExitCode : int {
    exit_ok = 0,
    /// Invalid input: usage, configuration, corpus validation, empty split.
    exit_invalid = 1,
    /// Failure while running: model, plugin or I/O errors.
    exit_runtime = 2,
};

/// Runs one subcommand. `args` excludes the program name, e.g.
/// {"adapt", "--mode", "back", "--out", "runs/r1"}.
int run(const std::vector<std::string>& args);

}  // namespace dualtrain::cli
