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
#include <optional>
#include <string>
#include <vector>

namespace hmflow {

/// m orthonormal tangent vectors per node.  Vector a, stored coordinate c
/// lives in component a * d + c, d the point dimension of the target.
struct FrameField {
    int m = 0;
    int d = 0;
    Field vectors;

    Vec vector(std::size_t node, int a) const;
    void set_vector(std::size_t node, int a, const Vec& v);
    const Grid2& grid() const {
        return vectors.grid();
    }
};

/// Axes whose tangent projections seed the initial frame.  Empty selects the
/// first m ambient (sphere) or chart (hyperbolic) axes.
struct FrameChoice {
    std::vector<Vec> axes;
    /// Used where the primary axes project to a degenerate set.
    std::vector<Vec> fallback_axes;
};

/// Frame at the base point: stored coordinates of m orthonormal vectors.
struct ReferenceFrame {
    Vec point;
    Mat vectors; // d x m
};

ReferenceFrame default_reference_frame(const TargetManifold& target);
/// Same point, vectors multiplied on the right by q in SO(m).
ReferenceFrame rotate_reference(const ReferenceFrame& ref, const Mat& q);

/// Symmetric (polar) orthonormalization of the tangent projections of the
/// chosen axes at every node; switches to the fallback axes where the
/// projections are nearly dependent and fixes the orientation.
FrameField initial_frame(const MapField& phi, const FrameChoice& choice = {});

/// One step of parallel transport along s: remove the normal motion with a
/// midpoint update, project onto the tangent space at phi_next, and
/// re-orthonormalize by the polar factor.
FrameField transport_frame(const FrameField& frame, const MapField& phi, const MapField& phi_next);
void transport_frame_in_place(FrameField& frame, const MapField& phi, const MapField& phi_next);

/// Largest |Gram - Identity| entry over nodes.
double gram_defect(const FrameField& frame, const MapField& phi);
/// Smallest orientation determinant over nodes (positive for a valid frame).
double min_orientation(const FrameField& frame, const MapField& phi);

/// Matrix fields store entry (b, a) in component b * m + a and act on frame
/// coordinate vectors by the ordinary matrix-vector product, so that
/// (A_j)_{ba} = <nabla_j e_a, e_b> and D_j = d_j + A_j.
struct GaugeFields {
    double s = 0.0;
    Field psi_s;
    std::array<Field, 2> psi_x;
    std::array<Field, 2> a_x;
};

/// psi_j from the tangent-projected central difference, psi_s from the
/// tension field, A_j the skew part of the frame's covariant derivative.
GaugeFields gauge_fields(const FrameField& frame, const MapField& phi, double s = 0.0);

/// Components of a tangent field in the frame.
Field frame_components(const FrameField& frame, const MapField& phi, const Field& tangent);

struct GaugeSlice {
    double s = 0.0;
    MapField phi;
    FrameField frame;
};

struct CurvaturePair {
    Field direct;   // d_1 A_2 - d_2 A_1 + [A_1, A_2]
    Field pullback; // frame expansion of R(d_1 phi, d_2 phi)
};

CurvaturePair curvature_F(const GaugeFields& fields, const MapField& phi);

/// kappa (u v^T - v u^T): the frame expansion of R(X, Y) on a constant
/// curvature target with frame components u, v of X, Y.
Field pullback_curvature(const Field& u, const Field& v, int kappa);

struct GaugeResiduals {
    double s = 0.0;
    double sup_a_s = 0.0;
    double sup_a_x = 0.0;
    double l2_a_x = 0.0;
    double torsion = 0.0;
    double frame_heat = 0.0;
    double eom1 = 0.0;
    double eom2 = 0.0;
    double eom3_x = 0.0;
    double eom3_s = 0.0;
    double f_mismatch = 0.0;
    double isometry = 0.0; // | |psi_x| - |d_x phi| |
    double skew = 0.0;     // |A + A^T|
};

/// Residuals at the middle of three consecutive slices spaced ds apart.
GaugeResiduals eom_residuals(const std::vector<GaugeSlice>& slices, double ds);
/// Slice-local residuals only (torsion, frame heat, F mismatch, isometry).
GaugeResiduals slice_residuals(const GaugeSlice& slice);

/// Per-node special orthogonal U minimizing |e U - T|, T the polar
/// orthonormalization of the reference vectors projected at phi.
Field procrustes_alignment(const FrameField& frame, const MapField& phi, const ReferenceFrame& ref);
/// Target frame T used by `procrustes_alignment`.
FrameField projected_reference(const MapField& phi, const ReferenceFrame& ref);
/// e -> e U at every node.
FrameField apply_gauge(const FrameField& frame, const Field& u);
/// psi -> U^T psi at every node.
Field rotate_components(const Field& psi, const Field& u);

/// Connection after e -> e U computed from the lattice transport law
/// A' = skew(U^T (W+ U(x+h) - W- U(x-h)) / 2h + U^T G U), with W the
/// neighbour overlaps of the old frame and G its connection term.
std::array<Field, 2> transform_connection(const FrameField& frame, const MapField& phi, const Field& u);

/// Largest |U^T U - I| entry and smallest det U over nodes.
struct RotationCheck {
    double orthogonality = 0.0;
    double min_det = 0.0;
};
RotationCheck check_rotation_field(const Field& u, int m);

struct GaugeHistory {
    std::vector<GaugeSlice> slices;
    std::vector<GaugeFields> samples;
    std::optional<Field> u; // set once normalized
};

/// Applies the s-independent U computed at the last slice to every sample.
/// Raises NotConverged unless final_energy <= stop_fraction * initial_energy.
GaugeHistory caloric_normalize(const GaugeHistory& history, const ReferenceFrame& ref, double initial_energy,
                               double final_energy, double stop_fraction);

/// sup over nodes of |e(x) - T(x)| with T from `projected_reference`, and
/// the same distance to the unprojected reference vectors.
struct NormalizationError {
    double to_projected = 0.0;
    double to_reference = 0.0;
};
NormalizationError normalization_error(const FrameField& frame, const MapField& phi, const ReferenceFrame& ref);

struct ConnectionDecayReport {
    std::vector<double> s;
    std::vector<double> sup_a;
    std::vector<double> l2_a;
    std::vector<double> sup_da;
    std::vector<double> l2_da;
    double slope_sup_a = 0.0;
    double slope_l2_a = 0.0;
    double slope_sup_da = 0.0;
    /// int s^{-1/2} ||A_x||_inf ds and int s^{-1/2} ||d_x A_x||_2 ds.
    double int_sup_a = 0.0;
    double int_l2_da = 0.0;
    /// Share of int_l2_da contributed beyond s_hi.
    double tail_l2_da = 0.0;
};

ConnectionDecayReport connection_decay_report(const GaugeHistory& history, double s_lo = 1.0, double s_hi = 10.0);

} // namespace hmflow
