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

// Node-level kernels shared by the flow, density and gauge modules.  Both
// supported targets have a metric that is a scalar multiple c(p) of the
// Euclidean product on stored coordinates, and constant sectional curvature,
// which keeps these loops backend-agnostic apart from the connection term.

#include "hmflow/flow.hpp"

#include <span>
#include <vector>

namespace hmflow::detail {

struct Wrap {
    std::vector<int> prev;
    std::vector<int> next;
    explicit Wrap(int n);
};

/// c(phi) at every node.
std::vector<double> metric_factors(const MapField& phi);

/// Gradient of the conformal exponent w, Gamma(X,Y) = (dw.X) Y + (dw.Y) X
/// - (X.Y) dw, per node; only for charted targets.  Layout: d planes.
Field chart_dw(const MapField& phi);

inline void chart_gamma(const double* dw, const double* x, const double* y, double* out, int d) {
    double wx = 0.0;
    double wy = 0.0;
    double xy = 0.0;
    for (int k = 0; k < d; ++k) {
        wx += dw[k] * x[k];
        wy += dw[k] * y[k];
        xy += x[k] * y[k];
    }
    for (int k = 0; k < d; ++k) {
        out[k] = wx * y[k] + wy * x[k] - xy * dw[k];
    }
}

/// Raw central difference of the stored coordinates along `axis`.
Field raw_derivative(const MapField& phi, int axis);

/// Tangent-projected central difference (sphere) or plain central difference
/// (chart): the jet entry d_j phi.
Field first_derivative(const MapField& phi, int axis);

/// Covariant derivative along `axis` of a stack of tangent vectors stored as
/// consecutive groups of d components.  `raw_dphi` is raw_derivative(phi,
/// axis); `dw` is chart_dw(phi) for charted targets (ignored otherwise).
Field covariant_derivative(const Field& section, const MapField& phi, const Field& raw_dphi,
                           const Field* dw, int axis);

/// Half the sum over the four neighbours of |phi_nb - phi|^2 / dx^2, times
/// c(phi): the one-sided averaged first energy density.
void one_sided_density(const MapField& phi, std::span<double> out);

/// Tension of stored coordinates `values` (which need not satisfy the point
/// constraint exactly, as for RK stages).
void tension_into(const TargetManifold& target, const Field& values, Field& out);

/// Throws NonTangentSection when a sphere section has a normal component.
void check_tangent_section(const MapField& phi, const Field& section, double tol = 1e-8);

} // namespace hmflow::detail
