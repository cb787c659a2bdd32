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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

namespace hmflow {
namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no hmflow::Error raised";
    return ErrorCode::InvalidArgument;
}

// Grid quadrature of the ideal map inside radius R plus the closed-form
// energy 4 pi / (1 + lambda^2 R^2) outside it.
double ideal_energy(const Grid2& g, double lambda, double radius) {
    return local_energy(ideal_stereographic_map(g, lambda), {0.0, 0.0}, radius) +
           kFourPi / (1.0 + lambda * lambda * radius * radius);
}

TEST(BumpData, ZeroAmplitudeIsConstant) {
    const Grid2 g(32, 16.0);
    const MapField phi = make_bump_data(sphere_target(2), g, 0.0, 2.0);
    const MapField base(g, sphere_target(2));
    EXPECT_EQ(max_abs_difference(phi.values(), base.values()), 0.0);
    EXPECT_EQ(energy(phi), 0.0);
}

TEST(BumpData, EnergyIsQuadraticForSmallAmplitude) {
    const Grid2 g(64, 16.0);
    for (const TargetManifold& t : {sphere_target(2), hyperbolic_target()}) {
        const double ratio = energy(make_bump_data(t, g, 0.02, 2.0)) / energy(make_bump_data(t, g, 0.01, 2.0));
        EXPECT_NEAR(ratio, 4.0, 0.08) << t.name();
    }
}

TEST(BumpData, ConstantOutsideSupport) {
    const Grid2 g(64, 16.0);
    const MapField phi = make_bump_data(sphere_target(2), g, 1.0, 2.0, {1.0, -0.5});
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            if (std::hypot(g.coord(i) - 1.0, g.coord(j) + 0.5) >= 2.0) {
                EXPECT_EQ((phi.point(g.index(i, j)) - phi.base_point()).norm(), 0.0);
            }
        }
    }
    EXPECT_EQ(boundary_band_deviation(phi), 0.0);
}

TEST(BumpData, TooWideOrOffCentre) {
    const Grid2 g(32, 16.0);
    EXPECT_EQ(code_of([&] { make_bump_data(sphere_target(2), g, 0.5, 4.5); }), ErrorCode::BumpTooWide);
    EXPECT_EQ(code_of([&] { make_bump_data(sphere_target(2), g, 0.5, 2.0, {3.0, 0.0}); }), ErrorCode::BumpTooWide);
}

TEST(BumpData, TranslationKeepsEnergy) {
    const Grid2 g(64, 16.0);
    const MapField phi = make_vector_bump_data(sphere_target(2), g, 1.0, 2.0);
    const MapField moved = translate_data(phi, {0.75, -1.25});
    EXPECT_EQ(energy(moved), energy(phi));
    const MapField back = translate_data(moved, {-0.75, 1.25});
    EXPECT_EQ(max_abs_difference(back.values(), phi.values()), 0.0);
}

TEST(BumpData, LatticeTranslationMatchesShiftedCentre) {
    const Grid2 g(64, 16.0);
    const MapField a = translate_data(make_bump_data(sphere_target(2), g, 0.8, 1.5), {0.5, -0.25});
    const MapField b = make_bump_data(sphere_target(2), g, 0.8, 1.5, {0.5, -0.25});
    EXPECT_LT(max_abs_difference(a.values(), b.values()), 1e-14);
}

TEST(BumpData, NonLatticeTranslationRejected) {
    const Grid2 g(32, 16.0);
    const MapField phi = make_bump_data(sphere_target(2), g, 0.5, 2.0);
    EXPECT_EQ(code_of([&] { translate_data(phi, {0.1, 0.0}); }), ErrorCode::IncommensurateScale);
}

TEST(StereographicData, IdealMapEnergyIsFourPi) {
    const Grid2 g(128, 16.0);
    for (double lambda : {0.5, 1.0}) {
        EXPECT_NEAR(ideal_energy(g, lambda, 6.0) / kFourPi, 1.0, 5e-3) << lambda;
    }
    EXPECT_NEAR(ideal_energy(g, 1.0, 6.0) / ideal_energy(g, 0.5, 6.0), 1.0, 5e-3);
}

TEST(StereographicData, CappedEnergyOnDefaultGrid) {
    const Grid2 g(128, 16.0);
    const MapField phi = make_stereographic_data(g, 2.0);
    EXPECT_NEAR(energy(phi) / kFourPi, 1.0, 0.01);
    EXPECT_LT(boundary_band_deviation(phi), 1e-12);
    EXPECT_LT(sup_norm(tension(phi)), 2.0);
}

TEST(StereographicData, ScaleRange) {
    const Grid2 g(128, 16.0);
    EXPECT_EQ(code_of([&] { make_stereographic_data(g, 0.1); }), ErrorCode::ScaleOutOfRange);
    EXPECT_EQ(code_of([&] { make_stereographic_data(g, 9.0); }), ErrorCode::ScaleOutOfRange);
    EXPECT_EQ(code_of([&] { ideal_stereographic_map(g, -1.0); }), ErrorCode::ScaleOutOfRange);
}

TEST(Rescale, UnitScaleIsIdentity) {
    const Grid2 g(32, 16.0);
    const MapField phi = make_vector_bump_data(sphere_target(2), g, 1.0, 2.0);
    EXPECT_EQ(max_abs_difference(rescale_data(phi, 1.0).values(), phi.values()), 0.0);
}

TEST(Rescale, ReciprocalIntegerSubsamplesExactly) {
    const Grid2 g(64, 16.0);
    const MapField wide = make_bump_data(sphere_target(2), g, 0.9, 2.0);
    const MapField narrow = make_bump_data(sphere_target(2), g, 0.9, 1.0);
    EXPECT_LT(max_abs_difference(rescale_data(wide, 0.5).values(), narrow.values()), 1e-14);
}

TEST(Rescale, IntegerScaleInterpolates) {
    const Grid2 g(256, 16.0);
    const MapField narrow = make_bump_data(sphere_target(2), g, 0.9, 1.5);
    const MapField wide = make_bump_data(sphere_target(2), g, 0.9, 3.0);
    EXPECT_LT(max_abs_difference(rescale_data(narrow, 2.0).values(), wide.values()), 1e-3);
}

TEST(Rescale, EnergyIsScaleInvariantOnResolvedData) {
    const Grid2 g(512, 32.0);
    const MapField phi = make_vector_bump_data(sphere_target(2), g, 1.0, 4.0);
    const double e0 = energy(phi);
    EXPECT_NEAR(energy(rescale_data(phi, 2.0)) / e0, 1.0, 1e-3);
}

TEST(Rescale, RejectsIncommensurateScales) {
    const Grid2 g(32, 16.0);
    const MapField phi = make_bump_data(sphere_target(2), g, 0.5, 1.0);
    EXPECT_EQ(code_of([&] { rescale_data(phi, 1.5); }), ErrorCode::IncommensurateScale);
    EXPECT_EQ(code_of([&] { rescale_data(phi, 0.0); }), ErrorCode::IncommensurateScale);
}

} // namespace
} // namespace hmflow
