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

#include "hmflow/flow.hpp"

#include <array>
#include <string>
#include <vector>

namespace hmflow {

/// Covariant derivative of a tangent section (point_dim components, or a
/// stack of such groups) along `axis`.  Sphere: tangent projection of the
/// central difference.  Chart: central difference plus the connection term.
Field covariant_derivative(const Field& section, const MapField& phi, int axis);

/// Iterated covariant derivatives nabla_{j1} ... nabla_{j(k-1)} d_{jk} phi.
/// entries[k-1] holds 2^k fields; the multi-index (j1, ..., jk) is encoded
/// with j1 as the most significant bit.
struct CovariantJet {
    int order = 0;
    std::vector<std::vector<Field>> entries;
};

CovariantJet covariant_jet(const MapField& phi, int order);

/// e_1 is the average of the forward and backward one-sided squared
/// differences (so that half its integral is `energy`); e_k for k >= 2 is
/// the squared metric norm of the jet entry of order k.
struct DensityStack {
    double s = 0.0;
    std::vector<Field> e;
    std::vector<double> E;
};

DensityStack density_stack(const MapField& phi, int order, double s = 0.0);

/// First energy density alone.
Field energy_density(const MapField& phi);

/// Half the integral of the first energy density.
double energy(const MapField& phi);

struct EnergySample {
    double s = 0.0;
    std::vector<double> E;     // E_1..E_K
    std::vector<double> sup_e; // sup e_1..sup e_K
    double sup_grad = 0.0;
    double e1_squared = 0.0; // integral of e_1^2
};

struct EnergySeries {
    double initial_energy = 0.0;
    std::vector<EnergySample> samples;

    /// Raises InvalidArgument when s does not increase.
    void append(EnergySample sample);
};

EnergySample summarize(const DensityStack& stack, const MapField& phi);

/// (int int e_1^2 dx ds)^{1/4}, trapezoid in s over the samples.
double e_norm(const EnergySeries& series);
/// The same quantity over [0, s_i] for every sample i.
std::vector<double> e_norm_partial(const EnergySeries& series);

/// Largest drop violation max(E_1(s_{i+1}) - E_1(s_i), 0) over the series.
double monotonicity_violation(const EnergySeries& series);

/// d_s e_1 - Delta e_1 + 2 e_2 - 2 sum_ij <R(d_i phi, d_j phi) d_j phi, d_i phi>
/// at the middle of three consecutive slices spaced ds apart.
Field bochner_residual_k1(const std::vector<MapField>& slices, double ds);

/// Closed-form curvature term 2 sum_ij <R(d_i phi, d_j phi) d_j phi, d_i phi>.
Field bochner_curvature_term(const MapField& phi);

/// max over nodes of |d_x sqrt(eps^2 + e_k)| - sqrt(e_{k+1}).
double diamagnetic_violation(const DensityStack& stack, int k = 1, double eps = 1e-12);

/// Half the integral of e_1 over nodes with periodic distance |x - x0| < R.
double local_energy(const MapField& phi, std::array<double, 2> x0, double radius);

struct ConcentrationTerms {
    double lhs = 0.0;           // E(phi(s) on B(x0, R))
    double local_initial = 0.0; // E(phi(0) on B(x0, 2R))
    double scaled_time = 0.0;   // s E0 / R^2
};

ConcentrationTerms concentration_check(const MapField& phi0, const MapField& phi_s, double initial_energy,
                                       std::array<double, 2> x0, double radius, double s);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct DecayFit {
    std::string quantity;
    double slope = 0.0;
    double reference = 0.0;
};

struct DecayReport {
    double s_lo = 1.0;
    double s_hi = 10.0;
    std::vector<DecayFit> fits;
    /// max over all samples of s E_2(s), divided by its value at s_lo.
    double s_e2_growth = 0.0;
    /// Partial sums of int s^{k-1} E_{k+1} ds and int s^{k-1} sup e_k ds.
    std::vector<double> e_accumulation;
    std::vector<double> sup_accumulation;
    /// s sup e_1(s) over the fit window, maximum.
    double max_s_sup_e1 = 0.0;

    const DecayFit& fit(const std::string& quantity) const;
};

/// Fits over samples in [s_lo, s_hi]; requires the series to reach s_hi with
/// s_hi >= 10 s_lo, else InsufficientSpan.
DecayReport decay_report(const EnergySeries& series, double s_lo = 1.0, double s_hi = 10.0);

} // namespace hmflow
