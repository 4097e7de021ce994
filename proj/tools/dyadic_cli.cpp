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
#include "dyadic/config.hpp"
#include "dyadic/error.hpp"
#include "dyadic/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kDivergence = 3,
    kOracleMismatch = 4,
};

int exit_code(dyadic::ErrorCode code)
{
    switch (code) {
    case dyadic::ErrorCode::InvalidArgument:
    case dyadic::ErrorCode::Config:
        return kConfigError;
    case dyadic::ErrorCode::Divergence:
    case dyadic::ErrorCode::Convergence:
        return kDivergence;
    case dyadic::ErrorCode::OracleMismatch:
        return kOracleMismatch;
    }
    return kFailure;
}

/// One machine-parsable line on stderr: `error <code> exit=<n>: <message>`.
int report_error(const std::string& code, int status, const std::string& message)
{
    std::cerr << "error " << code << " exit=" << status << ": " << message << '\n';
    return status;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<unsigned> threads;
};

dyadic::ExperimentConfig load(const std::string& path, const Overrides& overrides)
{
    dyadic::ExperimentConfig config = dyadic::load_config(path);
    if (overrides.seed) {
        config.seed = *overrides.seed;
    }
    if (overrides.out_dir) {
        config.output = *overrides.out_dir;
    }
    if (overrides.threads) {
        if (*overrides.threads == 0) {
            dyadic::fail(dyadic::ErrorCode::Config, "--threads must be at least 1");
        }
        config.threads = *overrides.threads;
    }
    return config;
}

int run_command(const std::string& path, const Overrides& overrides)
{
    const dyadic::ExperimentConfig config = load(path, overrides);
    const dyadic::RunOutcome outcome = dyadic::run_experiment(config, config.output);
    std::cout << "experiment = " << dyadic::to_string(config.experiment) << '\n';
    for (const auto& [key, value] : outcome.results) {
        std::cout << key << " = " << value << '\n';
    }
    std::cout << "output = " << config.output << '\n';
    if (outcome.diverged) {
        return report_error("divergence", kDivergence, "a trajectory crossed the divergence threshold");
    }
    if (outcome.oracle_checked && !outcome.oracle_passed) {
        return report_error("oracle_mismatch", kOracleMismatch, outcome.oracle_message);
    }
    if (outcome.oracle_checked) {
        std::cout << "oracle = pass\n";
    }
    return kOk;
}

int validate_command(const std::string& path, const Overrides& overrides)
{
    const dyadic::ExperimentConfig config = load(path, overrides);
    const dyadic::ValidationReport report = dyadic::validate_config(config);
    dyadic::write_report(std::cout, report);
    return report.ok() ? kOk : kConfigError;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Shell-model experiments: deterministic and stochastic dyadic cascades, "
                 "Girsanov and moment oracles, and the transport-noise corrector."};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(dyadic::version_string()));

    Overrides overrides;
    std::string config_path;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "key=value config file")->required();
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& v) { overrides.seed = v; }, "override numerics.seed");
        sub->add_option_function<std::string>(
            "--out-dir", [&](const std::string& v) { overrides.out_dir = v; }, "override experiment.output");
        sub->add_option_function<unsigned>(
            "--threads", [&](const unsigned& v) { overrides.threads = v; }, "worker threads (results do not depend on it)");
    };
    CLI::App* run = app.add_subcommand("run", "run an experiment and write its CSVs and manifest");
    CLI::App* validate = app.add_subcommand("validate", "dry-run: report derived sizes and bounds");
    add_common(run);
    add_common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        app.exit(e);
        return kConfigError;
    }

    try {
        if (run->parsed()) {
            return run_command(config_path, overrides);
        }
        return validate_command(config_path, overrides);
    } catch (const dyadic::Error& e) {
        return report_error(dyadic::to_string(e.code()), exit_code(e.code()), e.what());
    } catch (const std::exception& e) {
        return report_error("internal", kFailure, e.what());
    }
}
