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

#pragma once

#include "config.hpp"

#include "hmflow/densities.hpp"
#include "hmflow/energyspace.hpp"
#include "hmflow/gauge.hpp"
#include "hmflow/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hmflow::cli {

enum class Comparison { AtMost, AtLeast, Within, Report };

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    Comparison comparison = Comparison::AtMost;
    /// Non-gating checks are reported but never fail the run.
    bool gating = true;
    /// Not applicable to this run; reported as skipped.
    bool skipped = false;
    /// Centre for Comparison::Within.
    double target = 0.0;
    std::string detail;

    bool passed() const;
    std::string status() const;
};

struct RunEnd {
    std::string reason;
    double s_final = 0.0;
    std::size_t steps = 0;
};

struct Report {
    std::string experiment;
    std::vector<Check> checks;
    std::vector<DecayFit> fits;
    std::optional<RunEnd> termination;
    /// Data spec actually used, the experiment default when none was given.
    std::string data;
    /// Step control after the experiment's defaults were applied.
    std::optional<StepControl> control;
    std::vector<std::string> files;
    double runtime_seconds = 0.0;

    Check& add(Check c);
    bool passed() const;
};

/// `s, E1, E2, sup_e1, sup_grad, e_norm_partial`. E2 is nan when only e_1
/// was tracked.
void write_series_csv(const std::filesystem::path& path, const EnergySeries& series);

/// One row per gauge sample. Two-slice and three-slice columns come from
/// the probe at the same s, nan when there is none.
void write_gauge_csv(const std::filesystem::path& path, const GaugeHistory& history,
                     const std::vector<GaugeResiduals>& probes);

struct EnergySpaceSummary {
    double e0 = 0.0;
    double e_smax = 0.0;
    double s_final = 0.0;
    IdentityCheck identity;
    bool normalized = false;
};

void write_energyspace_json(const std::filesystem::path& path, const EnergySpaceSummary& summary);

/// `status` is pass, fail, config_error or solver_abort; `error_code` is set
/// for the last two.
void write_summary_json(const std::filesystem::path& path, const RunConfig& config, const Report& report,
                        const std::string& status, int exit_code, const std::string& error_code = {},
                        const std::string& error_message = {});

/// Shortest round-trip decimal form, "nan" and "inf" spelled out.
std::string format_number(double v);

} // namespace hmflow::cli
