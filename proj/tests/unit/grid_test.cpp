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

#include "hmflow/errors.hpp"
#include "hmflow/grid.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

namespace hmflow {
namespace {

constexpr double kPi = std::numbers::pi;

Field sample(const Grid2& g, const std::function<double(double, double)>& f) {
    Field out(g, 1);
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            out.at(0, i, j) = f(g.coord(i), g.coord(j));
        }
    }
    return out;
}

Field random_field(const Grid2& g, unsigned seed, bool zero_mean) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    Field out(g, 1);
    double mean = 0.0;
    for (double& v : out.data()) {
        v = nd(rng);
        mean += v;
    }
    if (zero_mean) {
        mean /= static_cast<double>(g.nodes());
        for (double& v : out.data()) {
            v -= mean;
        }
    }
    return out;
}

Field smooth_field(const Grid2& g) {
    const double L = g.length;
    return sample(g, [L](double x, double y) {
        return std::sin(2 * kPi * x / L) * std::cos(4 * kPi * y / L) + 0.3 * std::cos(2 * kPi * (x + y) / L);
    });
}

TEST(Grid2, RejectsOddOrSmallSizes) {
    for (int n : {15, 17, 8}) {
        try {
            Grid2 g(n, 16.0);
            ADD_FAILURE() << n;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
        }
    }
    EXPECT_THROW(Grid2(32, -1.0), Error);
    EXPECT_DOUBLE_EQ(Grid2(128, 16.0).dx(), 0.125);
}

TEST(Laplacian, AnnihilatesConstants) {
    const Grid2 g(32, 16.0);
    EXPECT_EQ(sup_norm(laplacian(Field(g, 1, 3.7))), 0.0);
}

TEST(Laplacian, SineIsEigenfieldWithDiscreteSymbol) {
    const Grid2 g(64, 16.0);
    const double dx = g.dx();
    const Field f = sample(g, [&](double x, double) { return std::sin(2 * kPi * x / g.length); });
    const double lambda = -(2.0 / (dx * dx)) * (1.0 - std::cos(2 * kPi * dx / g.length));
    EXPECT_LT(max_abs_difference(laplacian(f), lambda * f), 1e-12);
}

TEST(Laplacian, PreservesIndependenceOfAnAxis) {
    const Grid2 g(32, 8.0);
    const Field f = sample(g, [](double, double y) { return std::cos(y) + y * 0.0; });
    const Field lf = laplacian(f);
    for (int i = 1; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            EXPECT_EQ(lf.at(0, i, j), lf.at(0, 0, j));
        }
    }
}

TEST(Laplacian, AgreesWithDivergenceOfGradientToSecondOrder) {
    auto gap = [](int n) {
        const Grid2 g(n, 16.0);
        const Field f = smooth_field(g);
        const auto grad = gradient(f);
        return max_abs_difference(laplacian(f), divergence(grad[0], grad[1]));
    };
    const double coarse = gap(32);
    const double fine = gap(64);
    EXPECT_GT(coarse / fine, 3.5);
    EXPECT_LT(fine, 1e-2);
}

TEST(Gradient, ConstantsAndPlaneWaveSymbol) {
    const Grid2 g(64, 16.0);
    const auto zero = gradient(Field(g, 1, -2.0));
    EXPECT_EQ(sup_norm(zero[0]), 0.0);
    EXPECT_EQ(sup_norm(zero[1]), 0.0);

    const double k = 2 * kPi / g.length;
    const Field f = sample(g, [k](double x, double) { return std::sin(k * x); });
    const Field expected = sample(g, [&](double x, double) { return std::sin(k * g.dx()) / g.dx() * std::cos(k * x); });
    const auto grad = gradient(f);
    EXPECT_LT(max_abs_difference(grad[0], expected), 1e-12);
    EXPECT_LT(sup_norm(grad[1]), 1e-12);
}

TEST(Gradient, SwappingAxesSwapsComponents) {
    const Grid2 g(32, 16.0);
    const Field f = random_field(g, 11, false);
    Field swapped(g, 1);
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            swapped.at(0, i, j) = f.at(0, j, i);
        }
    }
    const auto a = gradient(f);
    const auto b = gradient(swapped);
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            EXPECT_EQ(a[0].at(0, i, j), b[1].at(0, j, i));
            EXPECT_EQ(a[1].at(0, i, j), b[0].at(0, j, i));
        }
    }
}

TEST(OneSidedDifferences, AverageIsCentral) {
    const Grid2 g(32, 16.0);
    const Field f = random_field(g, 5, false);
    for (int axis = 0; axis < 2; ++axis) {
        const Field avg = 0.5 * (forward_difference(f, axis) + backward_difference(f, axis));
        EXPECT_LT(max_abs_difference(avg, central_difference(f, axis)), 1e-12);
    }
}

TEST(HeatSemigroup, ZeroTimeIsIdentity) {
    const Grid2 g(32, 16.0);
    const Field f = random_field(g, 1, false);
    EXPECT_EQ(max_abs_difference(heat_semigroup(f, 0.0), f), 0.0);
}

TEST(HeatSemigroup, ConstantsStayConstant) {
    const Grid2 g(32, 16.0);
    const Field out = heat_semigroup(Field(g, 1, 2.5), 3.0);
    EXPECT_LT(max_abs_difference(out, Field(g, 1, 2.5)), 1e-13);
}

TEST(HeatSemigroup, ConservesMassAndObeysMaximumPrinciple) {
    const Grid2 g(64, 16.0);
    Field bump(g, 1);
    bump.at(0, 32, 32) = 1.0 / (g.dx() * g.dx());
    const double mass = integrate(bump);
    for (double s : {0.01, 0.3, 2.0}) {
        const Field out = heat_semigroup(bump, s);
        EXPECT_NEAR(integrate(out), mass, 1e-10);
        EXPECT_LE(sup_norm(out), sup_norm(bump) + 1e-12);
    }
}

TEST(HeatSemigroup, SemigroupLaw) {
    const Grid2 g(32, 16.0);
    const HeatSemigroup heat(g);
    const Field f = random_field(g, 3, false);
    const Field once = heat.apply(f, 0.7);
    const Field twice = heat.apply(heat.apply(f, 0.3), 0.4);
    EXPECT_LT(max_abs_difference(once, twice), 1e-10);
}

TEST(HeatSemigroup, SineModeDecaysAtDiscreteRate) {
    const Grid2 g(32, 16.0);
    const double dx = g.dx();
    const Field f = sample(g, [&](double, double y) { return std::cos(4 * kPi * y / g.length); });
    const double lambda = -(2.0 / (dx * dx)) * (1.0 - std::cos(4 * kPi * dx / g.length));
    const double s = 0.8;
    EXPECT_LT(max_abs_difference(heat_semigroup(f, s), std::exp(lambda * s) * f), 1e-12);
}

TEST(HeatSemigroup, TimeDerivativeIsLaplacian) {
    const Grid2 g(32, 16.0);
    const HeatSemigroup heat(g);
    const Field f = smooth_field(g);
    const double s = 0.5;
    const double h = 1e-4;
    const Field ds = (1.0 / (2.0 * h)) * (heat.apply(f, s + h) - heat.apply(f, s - h));
    EXPECT_LT(max_abs_difference(ds, laplacian(heat.apply(f, s))), 1e-7);
}

TEST(Strichartz, SingleModeIsFiniteAndStable) {
    const Grid2 g(32, 16.0);
    const Field f = sample(g, [&](double x, double) { return std::sin(2 * kPi * x / g.length); });
    const double p = std::numeric_limits<double>::infinity();
    const double coarse = strichartz_ratio(f, p, {.s_points = 64});
    const double fine = strichartz_ratio(f, p, {.s_points = 128});
    ASSERT_TRUE(std::isfinite(coarse));
    EXPECT_NEAR(coarse / fine, 1.0, 0.05);
}

TEST(Strichartz, SingleModeMatchesClosedForm) {
    // sup |e^{s Delta} u| = e^{s lambda}, so the p = inf numerator is int e^{2 s lambda} ds = 1 / (2|lambda|).
    const Grid2 g(32, 16.0);
    const double dx = g.dx();
    const Field f = sample(g, [&](double x, double) { return std::cos(2 * kPi * x / g.length); });
    const double lambda = (2.0 / (dx * dx)) * (1.0 - std::cos(2 * kPi * dx / g.length));
    const double l2sq = std::pow(lp_norm(f, 2.0), 2);
    const double expected = 1.0 / (2.0 * lambda) / l2sq;
    const double got = strichartz_ratio(f, std::numeric_limits<double>::infinity(), {.s_points = 256});
    EXPECT_NEAR(got / expected, 1.0, 0.02);
}

TEST(Strichartz, HomogeneousAndShiftInvariant) {
    const Grid2 g(32, 16.0);
    const Field f = random_field(g, 21, true);
    const double p = std::numeric_limits<double>::infinity();
    const double base = strichartz_ratio(f, p);
    EXPECT_NEAR(strichartz_ratio(10.0 * f, p) / base, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(strichartz_ratio(shift(f, 5, -3), p), base);
    EXPECT_NEAR(strichartz_ratio(shift(f, 5, -3), 4.0), strichartz_ratio(f, 4.0), 1e-12 * strichartz_ratio(f, 4.0));
}

TEST(Strichartz, RandomFieldsStayWithinTwiceTheMedian) {
    const Grid2 g(32, 16.0);
    std::vector<double> ratios;
    for (unsigned seed = 0; seed < 100; ++seed) {
        ratios.push_back(strichartz_ratio(random_field(g, 1000 + seed, true), std::numeric_limits<double>::infinity()));
        ASSERT_TRUE(std::isfinite(ratios.back()));
    }
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[49] + sorted[50]);
    EXPECT_LE(sorted.back(), 2.0 * median);
}

TEST(Strichartz, ZeroInputRaises) {
    const Grid2 g(16, 16.0);
    try {
        strichartz_ratio(Field(g, 1), 4.0);
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroInput);
    }
}

TEST(Quadrature, NormsAndIntegrals) {
    const Grid2 g(32, 12.0);
    EXPECT_NEAR(integrate(Field(g, 1, 1.0)), 144.0, 1e-12);
    const Field f = random_field(g, 9, false);
    Field sq = f;
    for (double& v : sq.data()) {
        v *= v;
    }
    EXPECT_NEAR(std::pow(lp_norm(f, 2.0), 2), integrate(sq), 1e-10 * integrate(sq));
    EXPECT_DOUBLE_EQ(sup_norm(-3.0 * f), 3.0 * sup_norm(f));
}

TEST(FieldCsv, RoundTripIsExact) {
    const Grid2 g(16, 4.0);
    Field f(g, 2);
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : f.data()) {
        v = u(rng) * 1e3;
    }
    std::stringstream ss;
    write_field_csv(ss, f);
    const Field back = read_field_csv(ss);
    EXPECT_TRUE(back.grid() == g);
    EXPECT_EQ(back.components(), 2);
    EXPECT_EQ(max_abs_difference(back, f), 0.0);
}

} // namespace
} // namespace hmflow
