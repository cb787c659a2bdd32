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

#include "hmflow/gauge.hpp"

#include <array>
#include <utility>
#include <vector>

namespace hmflow {

/// The pair (psi_s along the flow, psi_x at s = 0) in a fixed gauge.
struct ResolutionData {
    int m = 0;
    std::vector<double> s;
    std::vector<Field> psi_s;
    std::array<Field, 2> psi_x0;

    bool all_finite() const;
};

struct LValue {
    double value = 0.0;
};

/// Frame components of the forward edge differences, rescaled to the chord
/// length, so that half the integral of their squared norm is `energy`.
std::array<Field, 2> edge_derivative_fields(const FrameField& frame, const MapField& phi);

/// int int |psi_s|^2 dx ds over the sampled schedule (trapezoid in s).
double dissipation_integral(const ResolutionData& data);

/// 1/2 int int |psi_s|^2 + 1/4 int |psi_x(0)|^2.
LValue l_norm(const ResolutionData& data);

struct IdentityCheck {
    double dissipation = 0.0; // int int |psi_s|^2
    double energy_drop = 0.0; // E(0) - E(S)
    double gap = 0.0;         // |dissipation - energy_drop| / E(0)
    bool lemma_applies = false;
    double l_norm = 0.0;
    double lemma_gap = 0.0; // |l_norm - E(0)| / E(0)
};

/// Finite-horizon identity, plus the full identity l_norm = E(0) when the
/// final energy is at most stop_fraction * E(0).
IdentityCheck energy_identity_check(const ResolutionData& data, double initial_energy, double final_energy,
                                    double stop_fraction);

/// psi -> Q^T psi for every sample, the effect of rotating the boundary frame by Q.
ResolutionData rotate_data(const ResolutionData& data, const Mat& q);

/// Distance in the quotient by a global rotation: the square root of the
/// l_norm quadratic form of Q.d1 - d2, minimized over Q in SO(m).
double so_distance(const ResolutionData& d1, const ResolutionData& d2);

/// Both data on the union of their sample times: psi_s is interpolated
/// linearly in s inside each run's range and zero past its last sample.
/// Lets runs that stopped at different times be compared by so_distance.
std::pair<ResolutionData, ResolutionData> common_schedule(const ResolutionData& d1, const ResolutionData& d2);

struct CaloricOptions;

/// Runs the flow and caloric gauge from phi0 and returns the normalized data.
/// Raises NotConverged when the run does not reach the energy criterion.
ResolutionData resolution_map(const MapField& phi0, const ReferenceFrame& reference, const CaloricOptions& options);

} // namespace hmflow
