// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: validates a config, executes the requested experiment,
// and emits manifest.json, CSV tables, and summary.json (pass/fail against
// the configured thresholds). Files are written atomically (temp + rename).
#ifndef KRAICHNAN_EXPERIMENT_HPP
#define KRAICHNAN_EXPERIMENT_HPP

#include <string>

#include "kraichnan/config.hpp"

namespace kraichnan {

// Returns the process exit code: 0 all checks pass, 2 threshold failure.
// Errors propagate as exceptions; the caller maps them to exit code 1 and a
// FAILED marker is left in the output directory.
int run_experiment(const ExperimentConfig& config);

// Write `content` to dir/name atomically. Exposed for tests.
void atomic_write(const std::string& dir, const std::string& name, const std::string& content);

}  // namespace kraichnan

#endif
