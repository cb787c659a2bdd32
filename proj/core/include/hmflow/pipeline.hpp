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

// One flow run with frames transported alongside, energy samples, gauge
// samples, probe residuals and the final caloric normalization.

#include "hmflow/densities.hpp"
#include "hmflow/energyspace.hpp"
#include "hmflow/gauge.hpp"

#include <optional>
#include <vector>

namespace hmflow {

struct CaloricOptions {
    StepControl ctrl;
    SampleSchedule schedule;
    int k_max = 3;
    FrameChoice choice;
    /// Second frame transported from a different initial choice.
    std::optional<FrameChoice> alternate;
    std::optional<ReferenceFrame> reference;
    /// Gauge samples at s = 0 and log-spaced from gauge_start.
    bool track_gauge = true;
    double gauge_start = 0.01;
    int gauge_per_decade = 10;
    /// Three-slice residuals centred at the first step reaching each time.
    std::vector<double> probe_times;
    /// Map snapshots at the first step reaching each time.
    std::vector<double> snapshot_times;
    bool normalize = true;
};

struct FrameTrack {
    FrameField frame; // at the end of the run
    GaugeHistory history;
    std::optional<GaugeHistory> normalized;
    /// Normalized when `normalized` is set, raw transported gauge otherwise.
    ResolutionData resolution;
    double max_gram_defect = 0.0;
};

struct MapSnapshot {
    double s = 0.0;
    MapField phi;
};

struct CaloricRun {
    FlowHistory flow;
    EnergySeries series;
    MapField phi0;
    MapField phi_final;
    double ds = 0.0;
    /// Per-step trapezoid of int c |tension|^2 dx.
    double stepwise_dissipation = 0.0;
    FrameTrack primary;
    std::optional<FrameTrack> alternate;
    std::vector<GaugeResiduals> probes;
    std::vector<MapSnapshot> snapshots;
    ReferenceFrame reference;
};

CaloricRun run_caloric(const MapField& phi0, const CaloricOptions& options);

/// Energy-only run: no frames, samples per the schedule.
struct EnergyRun {
    FlowHistory flow;
    EnergySeries series;
    MapField phi_final;
    std::vector<MapSnapshot> snapshots;
    std::vector<double> bochner_probe_s;
    std::vector<double> bochner_probe_sup;
};

struct EnergyOptions {
    StepControl ctrl;
    SampleSchedule schedule;
    int k_max = 3;
    std::vector<double> snapshot_times;
    /// Bochner k = 1 residual centred at the first step reaching each time.
    std::vector<double> bochner_times;
};

EnergyRun run_energy(const MapField& phi0, const EnergyOptions& options);

} // namespace hmflow
