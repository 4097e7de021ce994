/*
 * Copyright 2026 The Dyadic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "dyadic/config.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dyadic {

struct RunOutcome {
    std::vector<std::string> files;                              ///< names inside the output directory
    std::vector<std::pair<std::string, std::string>> results;    ///< manifest result lines, in order
    bool diverged = false;
    bool oracle_checked = false;
    bool oracle_passed = true;
    std::string oracle_message;
};

/// Validates the config, runs the experiment, writes its CSVs and a
/// manifest.txt into out_dir. The manifest is itself a config: its
/// non-comment lines reproduce the run. Throws Config errors before
/// touching the filesystem when validation fails.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Median of a copy of the values.
double median(std::vector<double> values);

} // namespace dyadic
