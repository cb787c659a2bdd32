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

#include "hmflow/data.hpp"
#include "hmflow/densities.hpp"
#include "hmflow/errors.hpp"
#include "hmflow/gauge.hpp"
#include "hmflow/pipeline.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace hmflow {
namespace {

constexpr double kPi = std::numbers::pi;

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

MapField smooth_map(int n) {
    const Grid2 g(n, 16.0);
    const double k = 2 * kPi / g.length;
    MapField phi(g, sphere_target(2));
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            const Vec v = v3(0.8 * std::sin(k * g.coord(i)), 0.6 * std::cos(k * g.coord(j)),
                             1.0 + 0.3 * std::sin(k * g.coord(j)));
            phi.set_point(g.index(i, j), v.normalized());
        }
    }
    return phi;
}

// U(x) = rotation by a smooth angle field.
Field rotation_field(const Grid2& g) {
    const double k = 2 * kPi / g.length;
    Field u(g, 4);
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            const double th = 0.9 * std::sin(k * g.coord(i)) * std::cos(k * g.coord(j)) + 0.2;
            const std::size_t q = g.index(i, j);
            u.at(0, q) = std::cos(th);
            u.at(1, q) = -std::sin(th);
            u.at(2, q) = std::sin(th);
            u.at(3, q) = std::cos(th);
        }
    }
    return u;
}

double frame_distance(const FrameField& a, const FrameField& b) {
    return max_abs_difference(a.vectors, b.vectors);
}

GaugeResiduals probe(const MapField& phi0, double s) {
    CaloricOptions opts;
    opts.ctrl.s_max = s + 3.0 * opts.ctrl.ds(phi0.grid());
    opts.track_gauge = false;
    opts.normalize = false;
    opts.probe_times = {s};
    const CaloricRun run = run_caloric(phi0, opts);
    EXPECT_EQ(run.probes.size(), 1u);
    return run.probes.front();
}

// One long caloric run shared by the normalization tests.
const CaloricRun& bump_run() {
    static const CaloricRun run = [] {
        CaloricOptions opts;
        opts.ctrl.stop_energy_fraction = 1e-8;
        FrameChoice rotated;
        const double c = std::cos(0.6);
        const double s = std::sin(0.6);
        rotated.axes = {v3(c, s, 0.0), v3(-s, c, 0.0)};
        opts.alternate = rotated;
        return run_caloric(make_vector_bump_data(sphere_target(2), Grid2(64, 16.0), 1.0, 1.5), opts);
    }();
    return run;
}

TEST(InitialFrame, ConstantMapGivesConstantFrame) {
    const MapField phi(Grid2(32, 16.0), sphere_target(2));
    const FrameField e = initial_frame(phi);
    for (std::size_t q = 1; q < phi.grid().nodes(); ++q) {
        for (int a = 0; a < 2; ++a) {
            EXPECT_EQ((e.vector(q, a) - e.vector(0, a)).norm(), 0.0);
        }
    }
    EXPECT_LE(gram_defect(e, phi), 1e-12);
}

TEST(InitialFrame, OrthonormalAndOriented) {
    for (const MapField& phi : {make_vector_bump_data(sphere_target(2), Grid2(32, 16.0), 2.0, 3.0),
                                make_vector_bump_data(hyperbolic_target(), Grid2(32, 16.0), 1.5, 3.0), smooth_map(32)}) {
        const FrameField e = initial_frame(phi);
        EXPECT_LE(gram_defect(e, phi), 1e-12) << phi.target().name();
        EXPECT_GT(min_orientation(e, phi), 0.0) << phi.target().name();
    }
}

TEST(InitialFrame, FallbackChoicesDifferByRotationField) {
    // The bump passes through the first ambient axis, where its projection vanishes.
    const MapField phi = make_bump_data(sphere_target(2), Grid2(64, 16.0), kPi / 2.0, 2.0);
    FrameChoice a;
    a.fallback_axes = {v3(0, 1, 0), v3(0, 0, 1)};
    FrameChoice b;
    b.fallback_axes = {v3(0, 0, 1), v3(0, 1, 0)};
    const FrameField ea = initial_frame(phi, a);
    const FrameField eb = initial_frame(phi, b);
    EXPECT_LE(gram_defect(ea, phi), 1e-12);
    EXPECT_LE(gram_defect(eb, phi), 1e-12);
    Field u(phi.grid(), 4);
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                u.at(r * 2 + c, q) = ea.vector(q, r).dot(eb.vector(q, c));
            }
        }
    }
    const RotationCheck rc = check_rotation_field(u, 2);
    EXPECT_LE(rc.orthogonality, 1e-8);
    EXPECT_GT(rc.min_det, 0.0);
}

TEST(Transport, ConstantFlowLeavesFrameUnchanged) {
    const MapField phi(Grid2(32, 16.0), sphere_target(2));
    const FrameField e = initial_frame(phi);
    EXPECT_EQ(frame_distance(transport_frame(e, phi, phi), e), 0.0);
}

TEST(Transport, GreatCircleMatchesParallelTransport) {
    // phi moves along the great circle (sin t, 0, cos t); parallel transport keeps
    // the angle between e_1 and the velocity (cos t, 0, -sin t) fixed.
    const Grid2 g(16, 4.0);
    const double alpha = 0.4;
    auto point = [](double t) { return v3(std::sin(t), 0.0, std::cos(t)); };
    auto expected = [&](double t, int a) {
        const Vec tang = v3(std::cos(t), 0.0, -std::sin(t));
        const Vec side = v3(0.0, 1.0, 0.0);
        return a == 0 ? Vec(std::cos(alpha) * tang + std::sin(alpha) * side)
                      : Vec(-std::sin(alpha) * tang + std::cos(alpha) * side);
    };
    auto map_at = [&](double t) {
        MapField phi(g, sphere_target(2));
        for (std::size_t q = 0; q < g.nodes(); ++q) {
            phi.set_point(q, point(t));
        }
        return phi;
    };
    FrameField e{2, 3, Field(g, 6)};
    for (std::size_t q = 0; q < g.nodes(); ++q) {
        e.set_vector(q, 0, expected(0.0, 0));
        e.set_vector(q, 1, expected(0.0, 1));
    }
    const double dt = 0.01;
    const int steps = 100;
    double worst_step = 0.0;
    for (int k = 0; k < steps; ++k) {
        const MapField a = map_at(k * dt);
        const MapField b = map_at((k + 1) * dt);
        transport_frame_in_place(e, a, b);
        EXPECT_LE(gram_defect(e, b), 1e-10);
        for (int v = 0; v < 2; ++v) {
            worst_step = std::max(worst_step, (e.vector(0, v) - expected((k + 1) * dt, v)).norm());
        }
    }
    // Accumulated error over `steps` steps of O(dt^3) each.
    EXPECT_LE(worst_step, 10.0 * steps * dt * dt * dt);
}

TEST(Transport, PreservesGramOnBumpFlow) {
    const MapField phi0 = make_vector_bump_data(sphere_target(2), Grid2(32, 16.0), 1.5, 3.0);
    const StepControl ctrl;
    FlowState st = make_state(phi0, ctrl);
    FrameField e = initial_frame(phi0);
    for (int k = 0; k < 50; ++k) {
        const MapField before = st.phi;
        st = step(st, ctrl);
        transport_frame_in_place(e, before, st.phi);
        EXPECT_LE(gram_defect(e, st.phi), 1e-10);
    }
}

TEST(GaugeFields, ConstantMapHasZeroFields) {
    const MapField phi(Grid2(32, 16.0), sphere_target(2));
    const GaugeFields f = gauge_fields(initial_frame(phi), phi);
    EXPECT_EQ(sup_norm(f.psi_s), 0.0);
    for (int j = 0; j < 2; ++j) {
        EXPECT_EQ(sup_norm(f.psi_x[j]), 0.0);
        EXPECT_EQ(sup_norm(f.a_x[j]), 0.0);
    }
}

TEST(GaugeFields, IsometryAndSkewness) {
    for (const MapField& phi : {smooth_map(32), make_vector_bump_data(hyperbolic_target(), Grid2(32, 16.0), 1.5, 3.0)}) {
        const GaugeResiduals r = slice_residuals(GaugeSlice{0.0, phi, initial_frame(phi)});
        EXPECT_LE(r.isometry, 1e-8) << phi.target().name();
        EXPECT_LE(r.skew, 1e-10) << phi.target().name();
    }
}

TEST(GaugeFields, SquaredNormTracksFirstDensity) {
    auto gap = [](int n) {
        const MapField phi = smooth_map(n);
        const GaugeFields f = gauge_fields(initial_frame(phi), phi);
        Field sq(phi.grid(), 1);
        for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
            double v = 0.0;
            for (int j = 0; j < 2; ++j) {
                for (int a = 0; a < 2; ++a) {
                    v += f.psi_x[j].at(a, q) * f.psi_x[j].at(a, q);
                }
            }
            sq.at(0, q) = v;
        }
        return max_abs_difference(sq, energy_density(phi));
    };
    const double coarse = gap(64);
    EXPECT_LT(coarse, 1e-2);
    EXPECT_GT(coarse / gap(128), 3.5);
}

TEST(CurvatureF, ConstantMapIsFlat) {
    const MapField phi(Grid2(32, 16.0), sphere_target(2));
    const GaugeFields f = gauge_fields(initial_frame(phi), phi);
    const CurvaturePair fp = curvature_F(f, phi);
    EXPECT_EQ(sup_norm(fp.direct), 0.0);
    EXPECT_EQ(sup_norm(fp.pullback), 0.0);
}

TEST(CurvatureF, SpherePullbackIsWedgeOfPsi) {
    const MapField phi = smooth_map(32);
    const GaugeFields f = gauge_fields(initial_frame(phi), phi);
    const Field pb = curvature_F(f, phi).pullback;
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        const double wedge =
            f.psi_x[0].at(0, q) * f.psi_x[1].at(1, q) - f.psi_x[0].at(1, q) * f.psi_x[1].at(0, q);
        EXPECT_NEAR(pb.at(1, q), wedge, 1e-14);
        EXPECT_NEAR(pb.at(2, q), -wedge, 1e-14);
        EXPECT_EQ(pb.at(0, q), 0.0);
    }
    const Field h = pullback_curvature(f.psi_x[0], f.psi_x[1], -1);
    EXPECT_NEAR(max_abs_difference(h, -1.0 * pb), 0.0, 1e-15);
}

TEST(CurvatureF, DirectMatchesPullbackToSecondOrder) {
    auto mismatch = [](int n) {
        const MapField phi = smooth_map(n);
        return slice_residuals(GaugeSlice{0.0, phi, initial_frame(phi)}).f_mismatch;
    };
    EXPECT_GE(mismatch(32) / mismatch(64), 3.0);
}

TEST(EomResiduals, ConstantFlowIsExact) {
    const MapField phi(Grid2(32, 16.0), sphere_target(2));
    const FrameField e = initial_frame(phi);
    const GaugeSlice sl{0.0, phi, e};
    const GaugeResiduals r = eom_residuals({sl, sl, sl}, 0.01);
    for (double v : {r.sup_a_s, r.sup_a_x, r.torsion, r.frame_heat, r.eom1, r.eom2, r.eom3_x, r.eom3_s, r.f_mismatch}) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(EomResiduals, NeedThreeSlices) {
    const MapField phi(Grid2(32, 16.0), sphere_target(2));
    const GaugeSlice sl{0.0, phi, initial_frame(phi)};
    try {
        eom_residuals({sl, sl}, 0.01);
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientHistory);
    }
}

TEST(EomResiduals, ConvergeAtSecondOrder) {
    const GaugeResiduals coarse = probe(smooth_map(64), 0.1);
    const GaugeResiduals fine = probe(smooth_map(128), 0.1);
    const double floor = 1e-12;
    auto order = [&](double c, double f) {
        return (c <= floor && f <= floor) ? 2.0 : std::log2(c / f);
    };
    EXPECT_GE(order(coarse.torsion, fine.torsion), 1.8);
    EXPECT_GE(order(coarse.frame_heat, fine.frame_heat), 1.8);
    EXPECT_GE(order(coarse.eom1, fine.eom1), 1.8);
    EXPECT_GE(order(coarse.eom2, fine.eom2), 1.8);
    EXPECT_GE(order(coarse.eom3_x, fine.eom3_x), 1.8);
    EXPECT_GE(order(coarse.eom3_s, fine.eom3_s), 1.8);
    EXPECT_GE(order(coarse.sup_a_s, fine.sup_a_s), 1.8);
}

TEST(Procrustes, AlignedFrameGivesIdentity) {
    const MapField phi = smooth_map(32);
    const ReferenceFrame ref = default_reference_frame(phi.target());
    const FrameField t = projected_reference(phi, ref);
    const Field u = procrustes_alignment(t, phi, ref);
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        EXPECT_NEAR(u.at(0, q), 1.0, 1e-12);
        EXPECT_NEAR(u.at(1, q), 0.0, 1e-12);
        EXPECT_NEAR(u.at(2, q), 0.0, 1e-12);
        EXPECT_NEAR(u.at(3, q), 1.0, 1e-12);
    }
}

TEST(Procrustes, UndoesAKnownRotation) {
    const MapField phi = smooth_map(32);
    const ReferenceFrame ref = default_reference_frame(phi.target());
    const FrameField t = projected_reference(phi, ref);
    const Field u = rotation_field(phi.grid());
    Field ut(phi.grid(), 4);
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        ut.at(0, q) = u.at(0, q);
        ut.at(1, q) = u.at(2, q);
        ut.at(2, q) = u.at(1, q);
        ut.at(3, q) = u.at(3, q);
    }
    const FrameField rotated = apply_gauge(t, ut);
    const Field back = procrustes_alignment(rotated, phi, ref);
    EXPECT_LT(max_abs_difference(back, u), 1e-12);
}

TEST(GaugeLaw, TransformedFieldsMatchDirectRecomputation) {
    for (const MapField& phi : {smooth_map(32), make_vector_bump_data(hyperbolic_target(), Grid2(32, 16.0), 1.5, 3.0)}) {
        const FrameField e = initial_frame(phi);
        const Field u = rotation_field(phi.grid());
        const GaugeFields before = gauge_fields(e, phi);
        const GaugeFields after = gauge_fields(apply_gauge(e, u), phi);
        const auto a = transform_connection(e, phi, u);
        for (int j = 0; j < 2; ++j) {
            EXPECT_LT(max_abs_difference(a[j], after.a_x[j]), 1e-8) << phi.target().name();
            EXPECT_LT(max_abs_difference(rotate_components(before.psi_x[j], u), after.psi_x[j]), 1e-8);
        }
        EXPECT_LT(max_abs_difference(rotate_components(before.psi_s, u), after.psi_s), 1e-8);
    }
}

TEST(CaloricNormalize, RequiresEnergyCriterion) {
    const MapField phi = smooth_map(32);
    GaugeHistory h;
    h.slices.push_back(GaugeSlice{1.0, phi, initial_frame(phi)});
    try {
        caloric_normalize(h, default_reference_frame(phi.target()), 1.0, 0.5, 1e-4);
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotConverged);
    }
}

TEST(CaloricNormalize, FinalFrameMatchesReference) {
    const CaloricRun& run = bump_run();
    ASSERT_EQ(run.flow.reason, Termination::EnergyCriterion);
    ASSERT_TRUE(run.primary.normalized.has_value());
    const GaugeHistory& h = *run.primary.normalized;
    const NormalizationError err = normalization_error(h.slices.back().frame, h.slices.back().phi, run.reference);
    EXPECT_LE(err.to_projected, 1e-6);
    EXPECT_LE(std::max(sup_norm(h.samples.back().a_x[0]), sup_norm(h.samples.back().a_x[1])), 1e-4);
    EXPECT_LE(run.primary.max_gram_defect, 1e-10);
}

TEST(CaloricNormalize, IndependentOfInitialFrame) {
    const CaloricRun& run = bump_run();
    ASSERT_TRUE(run.alternate && run.alternate->normalized);
    const GaugeHistory& a = *run.primary.normalized;
    const GaugeHistory& b = *run.alternate->normalized;
    ASSERT_EQ(a.samples.size(), b.samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        worst = std::max(worst, max_abs_difference(a.samples[i].psi_s, b.samples[i].psi_s));
        for (int j = 0; j < 2; ++j) {
            worst = std::max(worst, max_abs_difference(a.samples[i].psi_x[j], b.samples[i].psi_x[j]));
            worst = std::max(worst, max_abs_difference(a.samples[i].a_x[j], b.samples[i].a_x[j]));
        }
    }
    EXPECT_LE(worst, 1e-8);
}

TEST(ConnectionDecay, ConstantHistoryIsZero) {
    const MapField phi(Grid2(16, 16.0), sphere_target(2));
    const FrameField e = initial_frame(phi);
    GaugeHistory h;
    for (double s = 0.5; s <= 20.0; s *= 1.5) {
        h.samples.push_back(gauge_fields(e, phi, s));
    }
    const ConnectionDecayReport r = connection_decay_report(h);
    for (double v : r.sup_a) {
        EXPECT_EQ(v, 0.0);
    }
    EXPECT_EQ(r.int_sup_a, 0.0);
    EXPECT_EQ(r.int_l2_da, 0.0);
}

TEST(ConnectionDecay, BumpConnectionDecaysAndIntegralConverges) {
    const CaloricRun& run = bump_run();
    const ConnectionDecayReport r = connection_decay_report(*run.primary.normalized);
    EXPECT_LE(r.slope_sup_a, -0.3);
    EXPECT_LE(r.tail_l2_da, 0.05);
    EXPECT_TRUE(std::isfinite(r.int_sup_a));
}

TEST(ConnectionDecay, ShortHistoryRaises) {
    const MapField phi(Grid2(16, 16.0), sphere_target(2));
    GaugeHistory h;
    h.samples.push_back(gauge_fields(initial_frame(phi), phi, 1.0));
    try {
        connection_decay_report(h);
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientSpan);
    }
}

} // namespace
} // namespace hmflow
