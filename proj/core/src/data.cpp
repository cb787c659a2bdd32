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

#include "hmflow/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace hmflow {

double bump_profile(double r) {
    if (r >= 1.0) {
        return 0.0;
    }
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

namespace {

// Geodesic exp map at the base point along the first tangent axis.
Vec exp_along_first_axis(const TargetManifold& target, double t) {
    Vec p = target.base_point();
    if (target.is_embedded()) {
        const int n = target.point_dim();
        p(n - 1) = std::cos(t);
        p(0) = std::sin(t);
        return p;
    }
    // Poincare ball: geodesic distance t from the origin sits at |u| = tanh(t/2).
    p(0) = std::tanh(0.5 * t);
    return p;
}

// Geodesic exp map at the base point along v = t1 V_1 + t2 V_2.
Vec exp_in_plane(const TargetManifold& target, double t1, double t2) {
    const double t = std::hypot(t1, t2);
    Vec p = target.base_point();
    if (t == 0.0) {
        return p;
    }
    if (target.is_embedded()) {
        const int n = target.point_dim();
        p(n - 1) = std::cos(t);
        p(0) = std::sin(t) * t1 / t;
        p(1) = std::sin(t) * t2 / t;
        return p;
    }
    const double r = std::tanh(0.5 * t);
    p(0) = r * t1 / t;
    p(1) = r * t2 / t;
    return p;
}

void check_bump(const TargetManifold& target, const Grid2& grid, double amplitude, double width,
                std::array<double, 2> center) {
    if (!(amplitude >= 0.0) || !(width > 0.0)) {
        raise(ErrorCode::InvalidArgument, "bump amplitude must be >= 0 and width > 0");
    }
    if (target.is_embedded() && amplitude >= std::numbers::pi) {
        raise(ErrorCode::InvalidArgument, "bump amplitude must stay below pi on the sphere");
    }
    const double half = grid.length / 4.0;
    if (std::abs(center[0]) + width > half + 1e-12 || std::abs(center[1]) + width > half + 1e-12) {
        raise(ErrorCode::BumpTooWide, "bump support leaves the central half-box");
    }
}

} // namespace

MapField make_bump_data(const TargetManifold& target, const Grid2& grid, double amplitude, double width,
                        std::array<double, 2> center) {
    check_bump(target, grid, amplitude, width, center);
    MapField phi(grid, target);
    for (int i = 0; i < grid.n; ++i) {
        for (int j = 0; j < grid.n; ++j) {
            const double r = std::hypot(grid.coord(i) - center[0], grid.coord(j) - center[1]) / width;
            const double eta = bump_profile(r);
            if (eta > 0.0 && amplitude > 0.0) {
                phi.set_point(grid.index(i, j), exp_along_first_axis(target, amplitude * eta));
            }
        }
    }
    return phi;
}

MapField make_vector_bump_data(const TargetManifold& target, const Grid2& grid, double amplitude, double width,
                               std::array<double, 2> center) {
    check_bump(target, grid, amplitude, width, center);
    if (target.intrinsic_dim() < 2) {
        raise(ErrorCode::InvalidArgument, "vector bump needs a target of dimension at least 2");
    }
    MapField phi(grid, target);
    for (int i = 0; i < grid.n; ++i) {
        for (int j = 0; j < grid.n; ++j) {
            const double r1 = (grid.coord(i) - center[0]) / width;
            const double r2 = (grid.coord(j) - center[1]) / width;
            const double eta = bump_profile(std::hypot(r1, r2));
            if (eta > 0.0 && amplitude > 0.0) {
                phi.set_point(grid.index(i, j), exp_in_plane(target, amplitude * eta * r1, amplitude * eta * r2));
            }
        }
    }
    return phi;
}

double stereographic_angle(double r, double lambda) {
    return 2.0 * std::atan2(1.0, lambda * r);
}

namespace {

Vec sphere_point(double theta, double x, double y) {
    const double r = std::hypot(x, y);
    Vec p(3);
    if (r > 0.0) {
        p << std::sin(theta) * x / r, std::sin(theta) * y / r, std::cos(theta);
    } else {
        p << 0.0, 0.0, std::cos(theta);
    }
    return p;
}

} // namespace

MapField ideal_stereographic_map(const Grid2& grid, double lambda) {
    if (!(lambda > 0.0)) {
        raise(ErrorCode::ScaleOutOfRange, "stereographic scale must be positive");
    }
    MapField phi(grid, sphere_target(2));
    for (int i = 0; i < grid.n; ++i) {
        for (int j = 0; j < grid.n; ++j) {
            const double x = grid.coord(i);
            const double y = grid.coord(j);
            phi.set_point(grid.index(i, j), sphere_point(stereographic_angle(std::hypot(x, y), lambda), x, y));
        }
    }
    return phi;
}

MapField make_stereographic_data(const Grid2& grid, double lambda) {
    const double r1 = grid.length / 4.0;
    const double r2 = 3.0 * grid.length / 8.0;
    // The cap must start where the map is already near the base point, and
    // the core (radius 1/lambda) must span at least one cell.
    const double lambda_min = 1.0 / (r1 * std::tan(std::numbers::pi / 8.0));
    if (!(lambda >= lambda_min) || !(lambda * grid.dx() <= 1.0)) {
        raise(ErrorCode::ScaleOutOfRange, "stereographic scale does not fit the grid");
    }
    const double theta2 = stereographic_angle(r2, lambda);
    MapField phi(grid, sphere_target(2));
    for (int i = 0; i < grid.n; ++i) {
        for (int j = 0; j < grid.n; ++j) {
            const double x = grid.coord(i);
            const double y = grid.coord(j);
            const double r = std::hypot(x, y);
            if (r >= r2) {
                continue;
            }
            double theta = stereographic_angle(r, lambda) - theta2 * r / r2;
            if (r > r1) {
                const double t = (r - r1) / (r2 - r1);
                theta *= 1.0 - t * t * (3.0 - 2.0 * t);
            }
            phi.set_point(grid.index(i, j), sphere_point(theta, x, y));
        }
    }
    return phi;
}

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// Evaluates the trigonometric interpolant of a periodic plane on a grid k
// times finer.  Returns the fine plane of size (k n)^2.
std::vector<double> upsample(std::span<const double> plane, int n, int k) {
    const int fn = k * n;
    fftw_complex* coarse = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    fftw_complex* fine = fftw_alloc_complex(static_cast<std::size_t>(fn) * fn);
    fftw_plan fwd;
    fftw_plan bwd;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fwd = fftw_plan_dft_2d(n, n, coarse, coarse, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_2d(fn, fn, fine, fine, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    for (std::size_t q = 0; q < plane.size(); ++q) {
        coarse[q][0] = plane[q];
        coarse[q][1] = 0.0;
    }
    fftw_execute(fwd);
    for (std::size_t q = 0; q < static_cast<std::size_t>(fn) * fn; ++q) {
        fine[q][0] = 0.0;
        fine[q][1] = 0.0;
    }
    // Signed frequency f in [-n/2, n/2); the Nyquist line is split evenly
    // between +-n/2 so the interpolant stays real.
    auto targets = [&](int idx, int out[2], double w[2]) {
        const int f = idx < n / 2 ? idx : idx - n;
        if (f == -n / 2) {
            out[0] = fn - n / 2;
            out[1] = n / 2;
            w[0] = w[1] = 0.5;
            return 2;
        }
        out[0] = f >= 0 ? f : fn + f;
        w[0] = 1.0;
        return 1;
    };
    const double norm = 1.0 / (static_cast<double>(n) * n);
    for (int a = 0; a < n; ++a) {
        int ta[2];
        double wa[2];
        const int na = targets(a, ta, wa);
        for (int b = 0; b < n; ++b) {
            int tb[2];
            double wb[2];
            const int nb = targets(b, tb, wb);
            const std::size_t src = static_cast<std::size_t>(a) * n + b;
            for (int p = 0; p < na; ++p) {
                for (int q = 0; q < nb; ++q) {
                    const std::size_t dst = static_cast<std::size_t>(ta[p]) * fn + tb[q];
                    const double w = wa[p] * wb[q] * norm;
                    fine[dst][0] += w * coarse[src][0];
                    fine[dst][1] += w * coarse[src][1];
                }
            }
        }
    }
    fftw_execute(bwd);
    std::vector<double> out(static_cast<std::size_t>(fn) * fn);
    for (std::size_t q = 0; q < out.size(); ++q) {
        out[q] = fine[q][0];
    }
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    fftw_free(coarse);
    fftw_free(fine);
    return out;
}

double support_extent(const MapField& phi) {
    const Grid2& g = phi.grid();
    double extent = 0.0;
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            const std::size_t k = g.index(i, j);
            double d = 0.0;
            for (int c = 0; c < phi.point_dim(); ++c) {
                d = std::max(d, std::abs(phi.values().at(c, k) - phi.base_point()(c)));
            }
            if (d > 1e-13) {
                extent = std::max(extent, std::max(std::abs(g.coord(i)), std::abs(g.coord(j))));
            }
        }
    }
    return extent;
}

int as_integer(double v) {
    const double r = std::round(v);
    if (r < 1.0 || std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v))) {
        return 0;
    }
    return static_cast<int>(r);
}

} // namespace

MapField rescale_data(const MapField& phi0, double lambda) {
    if (!(lambda > 0.0)) {
        raise(ErrorCode::IncommensurateScale, "scale must be positive");
    }
    const Grid2& g = phi0.grid();
    const int n = g.n;
    const int up = as_integer(lambda);
    const int down = as_integer(1.0 / lambda);
    if (up == 1 || down == 1) {
        return phi0;
    }
    MapField out(g, phi0.target(), Field(g, phi0.point_dim()), phi0.base_point());
    if (up > 1) {
        if (up * support_extent(phi0) > g.length / 4.0 + 1e-9) {
            raise(ErrorCode::ScaleOutOfRange, "rescaled data would leave the central half-box");
        }
        const int fn = up * n;
        for (int c = 0; c < phi0.point_dim(); ++c) {
            std::vector<double> dev(phi0.values().plane(c).begin(), phi0.values().plane(c).end());
            for (double& v : dev) {
                v -= phi0.base_point()(c);
            }
            const std::vector<double> fine = upsample(dev, n, up);
            for (int i = 0; i < n; ++i) {
                const int fi = i - n / 2 + fn / 2;
                for (int j = 0; j < n; ++j) {
                    const int fj = j - n / 2 + fn / 2;
                    out.values().at(c, i, j) =
                        phi0.base_point()(c) + fine[static_cast<std::size_t>(fi) * fn + fj];
                }
            }
        }
        for (std::size_t k = 0; k < g.nodes(); ++k) {
            out.set_point(k, retract(out.target(), out.point(k)));
        }
        return out;
    }
    if (down > 1) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const int si = n / 2 + down * (i - n / 2);
                const int sj = n / 2 + down * (j - n / 2);
                Vec p = phi0.base_point();
                if (si >= 0 && si < n && sj >= 0 && sj < n) {
                    p = phi0.point(g.index(si, sj));
                }
                out.set_point(g.index(i, j), p);
            }
        }
        return out;
    }
    raise(ErrorCode::IncommensurateScale, "scale must be an integer or the reciprocal of one");
}

MapField translate_data(const MapField& phi0, std::array<double, 2> x0) {
    const Grid2& g = phi0.grid();
    int steps[2];
    for (int a = 0; a < 2; ++a) {
        const double q = x0[a] / g.dx();
        const double r = std::round(q);
        if (std::abs(q - r) > 1e-9) {
            raise(ErrorCode::IncommensurateScale, "translation is not a lattice vector");
        }
        steps[a] = static_cast<int>(r);
    }
    return MapField(g, phi0.target(), shift(phi0.values(), steps[0], steps[1]), phi0.base_point());
}

} // namespace hmflow
