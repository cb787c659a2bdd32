// Copyright 2026 The hmflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// flow list
// flow run [--config FILE] [--experiment NAME] [--target ...] [--data ...] ...
//
// Exit status: 0 all gating checks pass, 1 a check failed, 2 configuration
// error, 3 solver abort.

#include "experiments.hpp"

#include "hmflow/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace hmflow;
using namespace hmflow::cli;

constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kSolverAbort = 3;

// Flags and the settings keys they override, in application order.
const std::vector<std::pair<std::string, std::string>> kFlags = {
    {"--target", "target"}, {"--data", "data"}, {"--n", "n"},       {"--box", "box"},
    {"--cfl", "cfl"},       {"--smax", "smax"}, {"--stop", "stop"}, {"--experiment", "experiment"},
    {"--out", "out"},       {"--seed", "seed"}, {"--k-max", "k_max"},
};

void print_report(const Report& r) {
    for (const Check& c : r.checks) {
        std::printf("%-8s %-28s %s\n", c.status().c_str(), c.name.c_str(), format_number(c.value).c_str());
    }
}

// Best effort: the output directory may be the thing that is broken.
void try_summary(const RunConfig& config, const Report& report, const std::string& status, int code,
                 const std::string& error_code, const std::string& message) {
    try {
        std::filesystem::create_directories(config.out);
        write_summary_json(std::filesystem::path(config.out) / "summary.json", config, report, status, code,
                           error_code, message);
    } catch (const std::exception&) {
    }
}

int run(const std::string& config_file, const std::map<std::string, std::string>& flags) {
    RunConfig config;
    Report report;
    try {
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) {
                raise(ErrorCode::ConfigError, "cannot read " + config_file);
            }
            for (const auto& [k, v] : read_settings(in)) {
                apply_setting(config, k, v);
            }
        }
        for (const auto& [flag, key] : kFlags) {
            const auto it = flags.find(key);
            if (it != flags.end()) {
                apply_setting(config, key, it->second);
            }
        }
        validate(config);
    } catch (const Error& e) {
        std::fprintf(stderr, "flow: %s\n", e.what());
        try_summary(config, report, "config_error", kConfigError, std::string(to_string(e.code())), e.what());
        return kConfigError;
    }

    try {
        run_experiment(config, report);
    } catch (const Error& e) {
        const bool config_error = e.code() == ErrorCode::ConfigError;
        const int code = config_error ? kConfigError : kSolverAbort;
        std::fprintf(stderr, "flow: %s\n", e.what());
        try_summary(config, report, config_error ? "config_error" : "solver_abort", code,
                    std::string(to_string(e.code())), e.what());
        return code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "flow: %s\n", e.what());
        try_summary(config, report, "solver_abort", kSolverAbort, "Internal", e.what());
        return kSolverAbort;
    }

    const bool ok = report.passed();
    const int code = ok ? kPass : kCheckFailed;
    report.files.push_back("summary.json");
    try {
        write_summary_json(std::filesystem::path(config.out) / "summary.json", config, report, ok ? "pass" : "fail",
                           code);
    } catch (const Error& e) {
        std::fprintf(stderr, "flow: %s\n", e.what());
        return kConfigError;
    }
    print_report(report);
    std::printf("%s %s\n", config.experiment.c_str(), ok ? "PASS" : "FAIL");
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Harmonic map heat flow experiments"};
    app.require_subcommand(1);

    CLI::App* list = app.add_subcommand("list", "Print the experiment names");
    CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment");

    std::string config_file;
    run_cmd->add_option("--config", config_file, "key = value settings file; flags override it");
    std::map<std::string, std::string> values;
    std::vector<std::pair<CLI::Option*, std::string>> options;
    for (const auto& [flag, key] : kFlags) {
        options.emplace_back(run_cmd->add_option(flag, values[key]), key);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    }

    if (list->parsed()) {
        for (const std::string& name : list_experiments()) {
            std::printf("%s\n", name.c_str());
        }
        return kPass;
    }
    std::map<std::string, std::string> given;
    for (const auto& [opt, key] : options) {
        if (opt->count() > 0) {
            given[key] = values[key];
        }
    }
    return run(config_file, given);
}
