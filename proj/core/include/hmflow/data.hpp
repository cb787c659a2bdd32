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

namespace hmflow {

/// exp(1 - 1/(1 - r^2)) on r < 1, zero outside; smooth with eta(0) = 1.
double bump_profile(double r);

/// phi(x) = exp_{base}(a * eta(|x - center| / w) * V), V the first tangent
/// axis at the base point.  The support must lie in the central half-box.
MapField make_bump_data(const TargetManifold& target, const Grid2& grid, double amplitude, double width,
                        std::array<double, 2> center = {0.0, 0.0});

/// phi(x) = exp_{base}(a * eta(rho) * (rho_1 V_1 + rho_2 V_2)) with
/// rho = (x - center) / w and V_1, V_2 the first two tangent axes.  Unlike
/// `make_bump_data` the image is two-dimensional, so the pulled-back
/// connection and curvature do not vanish.
MapField make_vector_bump_data(const TargetManifold& target, const Grid2& grid, double amplitude, double width,
                               std::array<double, 2> center = {0.0, 0.0});

/// Inverse stereographic projection of lambda x into S^2 with the base point
/// (north pole) at infinity, evaluated without any cap.  Not constant near
/// the box edge, so only meaningful away from the boundary.
MapField ideal_stereographic_map(const Grid2& grid, double lambda);

/// Polar angle from the north pole of the ideal map at radius r.
double stereographic_angle(double r, double lambda);

/// Degree-one stereographic data capped to the base point between radii
/// L/4 and 3L/8.  The cap subtracts the linear radial mode that makes the
/// angle vanish at 3L/8, which keeps the extra energy near its minimum.
MapField make_stereographic_data(const Grid2& grid, double lambda);

/// phi0(x / lambda).  Integer lambda uses trigonometric interpolation of the
/// deviation from the base point; lambda = 1/k subsamples exactly.
MapField rescale_data(const MapField& phi0, double lambda);

/// phi0(x - x0) by periodic lattice shift; x0 must be a lattice vector.
MapField translate_data(const MapField& phi0, std::array<double, 2> x0);

} // namespace hmflow
