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

#include "hmflow/grid.hpp"

#include "hmflow/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace hmflow {

Grid2::Grid2(int n_, double length_) : n(n_), length(length_) {
    if (n < 16 || n % 2 != 0) {
        raise(ErrorCode::InvalidArgument, "grid size must be even and at least 16");
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
        raise(ErrorCode::InvalidArgument, "box length must be positive");
    }
}

Field::Field(const Grid2& grid, int components, double fill)
    : grid_(grid), components_(components),
      data_(static_cast<std::size_t>(components) * grid.nodes(), fill) {}

bool Field::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void check_same_shape(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid()) || a.components() != b.components()) {
        raise(ErrorCode::InvalidArgument, "field shapes differ");
    }
}

// Neighbour index tables for periodic wrap.
struct Wrap {
    std::vector<int> prev;
    std::vector<int> next;
    explicit Wrap(int n) : prev(n), next(n) {
        for (int i = 0; i < n; ++i) {
            prev[i] = (i + n - 1) % n;
            next[i] = (i + 1) % n;
        }
    }
};

} // namespace

Field& Field::operator+=(const Field& other) {
    check_same_shape(*this, other);
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += other.data_[k];
    }
    return *this;
}

Field& Field::operator-=(const Field& other) {
    check_same_shape(*this, other);
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] -= other.data_[k];
    }
    return *this;
}

Field& Field::operator*=(double c) {
    for (double& v : data_) {
        v *= c;
    }
    return *this;
}

Field operator+(Field a, const Field& b) {
    a += b;
    return a;
}

Field operator-(Field a, const Field& b) {
    a -= b;
    return a;
}

Field operator*(double c, Field a) {
    a *= c;
    return a;
}

Field pointwise_norm(const Field& f) {
    Field out(f.grid(), 1);
    auto o = out.plane(0);
    for (int c = 0; c < f.components(); ++c) {
        auto p = f.plane(c);
        for (std::size_t k = 0; k < p.size(); ++k) {
            o[k] += p[k] * p[k];
        }
    }
    for (double& v : o) {
        v = std::sqrt(v);
    }
    return out;
}

double max_abs_difference(const Field& a, const Field& b) {
    check_same_shape(a, b);
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) {
        m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    }
    return m;
}

Field laplacian(const Field& f) {
    const Grid2& g = f.grid();
    const int n = g.n;
    const double inv = 1.0 / (g.dx() * g.dx());
    const Wrap w(n);
    Field out(g, f.components());
    for (int c = 0; c < f.components(); ++c) {
        auto in = f.plane(c);
        auto o = out.plane(c);
        for (int i = 0; i < n; ++i) {
            const double* row = in.data() + g.index(i, 0);
            const double* up = in.data() + g.index(w.prev[i], 0);
            const double* down = in.data() + g.index(w.next[i], 0);
            double* dst = o.data() + g.index(i, 0);
            for (int j = 0; j < n; ++j) {
                dst[j] = (up[j] + down[j] + row[w.prev[j]] + row[w.next[j]] - 4.0 * row[j]) * inv;
            }
        }
    }
    return out;
}

namespace {

// out = (f(node + step) * a + f(node) * b + f(node - step) * c) along axis.
Field axis_stencil(const Field& f, int axis, double a, double b, double c) {
    if (axis != 0 && axis != 1) {
        raise(ErrorCode::InvalidArgument, "axis must be 0 or 1");
    }
    const Grid2& g = f.grid();
    const int n = g.n;
    const Wrap w(n);
    Field out(g, f.components());
    for (int comp = 0; comp < f.components(); ++comp) {
        auto in = f.plane(comp);
        auto o = out.plane(comp);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double fp;
                double fm;
                if (axis == 0) {
                    fp = in[g.index(w.next[i], j)];
                    fm = in[g.index(w.prev[i], j)];
                } else {
                    fp = in[g.index(i, w.next[j])];
                    fm = in[g.index(i, w.prev[j])];
                }
                o[g.index(i, j)] = a * fp + b * in[g.index(i, j)] + c * fm;
            }
        }
    }
    return out;
}

} // namespace

Field central_difference(const Field& f, int axis) {
    const double h = 0.5 / f.grid().dx();
    return axis_stencil(f, axis, h, 0.0, -h);
}

Field forward_difference(const Field& f, int axis) {
    const double h = 1.0 / f.grid().dx();
    return axis_stencil(f, axis, h, -h, 0.0);
}

Field backward_difference(const Field& f, int axis) {
    const double h = 1.0 / f.grid().dx();
    return axis_stencil(f, axis, 0.0, h, -h);
}

std::array<Field, 2> gradient(const Field& f) {
    return {central_difference(f, 0), central_difference(f, 1)};
}

Field divergence(const Field& fx, const Field& fy) {
    return central_difference(fx, 0) + central_difference(fy, 1);
}

double integrate(const Field& f) {
    if (f.components() != 1) {
        raise(ErrorCode::InvalidArgument, "integrate expects a scalar field");
    }
    double sum = 0.0;
    for (double v : f.plane(0)) {
        sum += v;
    }
    const double dx = f.grid().dx();
    return sum * dx * dx;
}

double lp_norm(const Field& f, double p) {
    const Field mag = pointwise_norm(f);
    auto m = mag.plane(0);
    if (std::isinf(p)) {
        return m.empty() ? 0.0 : *std::max_element(m.begin(), m.end());
    }
    if (!(p >= 1.0)) {
        raise(ErrorCode::InvalidArgument, "lp_norm needs p >= 1");
    }
    double sum = 0.0;
    for (double v : m) {
        sum += (p == 2.0) ? v * v : std::pow(v, p);
    }
    const double dx = f.grid().dx();
    return std::pow(sum * dx * dx, 1.0 / p);
}

double sup_norm(const Field& f) {
    return lp_norm(f, std::numeric_limits<double>::infinity());
}

Field shift(const Field& f, int di, int dj) {
    const Grid2& g = f.grid();
    Field out(g, f.components());
    for (int c = 0; c < f.components(); ++c) {
        auto in = f.plane(c);
        auto o = out.plane(c);
        for (int i = 0; i < g.n; ++i) {
            const int si = g.wrap(i - di);
            for (int j = 0; j < g.n; ++j) {
                o[g.index(i, j)] = in[g.index(si, g.wrap(j - dj))];
            }
        }
    }
    return out;
}

// FFTW planning is not thread-safe; execution with fresh aligned arrays is.
namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

struct HeatSemigroup::Impl {
    Grid2 grid;
    int half = 0;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    std::vector<double> symbol;
};

HeatSemigroup::HeatSemigroup(const Grid2& grid) : impl_(std::make_unique<Impl>()) {
    Impl& s = *impl_;
    s.grid = grid;
    const int n = grid.n;
    s.half = n / 2 + 1;
    const std::size_t spec_size = static_cast<std::size_t>(n) * s.half;
    double* real = fftw_alloc_real(grid.nodes());
    fftw_complex* cplx = fftw_alloc_complex(spec_size);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        s.forward = fftw_plan_dft_r2c_2d(n, n, real, cplx, FFTW_ESTIMATE);
        s.backward = fftw_plan_dft_c2r_2d(n, n, cplx, real, FFTW_ESTIMATE);
    }
    fftw_free(real);
    fftw_free(cplx);

    const double inv = 1.0 / (grid.dx() * grid.dx());
    s.symbol.resize(spec_size);
    for (int k1 = 0; k1 < n; ++k1) {
        const double a = std::sin(std::numbers::pi * k1 / n);
        for (int k2 = 0; k2 < s.half; ++k2) {
            const double b = std::sin(std::numbers::pi * k2 / n);
            s.symbol[static_cast<std::size_t>(k1) * s.half + k2] = -4.0 * inv * (a * a + b * b);
        }
    }
}

HeatSemigroup::~HeatSemigroup() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(impl_->forward);
    fftw_destroy_plan(impl_->backward);
}

const std::vector<double>& HeatSemigroup::symbol() const {
    return impl_->symbol;
}

HeatSemigroup::Spectrum HeatSemigroup::transform(std::span<const double> plane) const {
    const Impl& s = *impl_;
    const std::size_t spec_size = s.symbol.size();
    double* real = fftw_alloc_real(s.grid.nodes());
    fftw_complex* cplx = fftw_alloc_complex(spec_size);
    std::copy(plane.begin(), plane.end(), real);
    fftw_execute_dft_r2c(s.forward, real, cplx);
    Spectrum spec;
    spec.re.resize(spec_size);
    spec.im.resize(spec_size);
    for (std::size_t k = 0; k < spec_size; ++k) {
        spec.re[k] = cplx[k][0];
        spec.im[k] = cplx[k][1];
    }
    fftw_free(real);
    fftw_free(cplx);
    return spec;
}

void HeatSemigroup::evaluate(const Spectrum& spec, double s, std::span<double> out) const {
    const Impl& st = *impl_;
    const std::size_t spec_size = st.symbol.size();
    double* real = fftw_alloc_real(st.grid.nodes());
    fftw_complex* cplx = fftw_alloc_complex(spec_size);
    const double norm = 1.0 / static_cast<double>(st.grid.nodes());
    for (std::size_t k = 0; k < spec_size; ++k) {
        const double damp = std::exp(s * st.symbol[k]) * norm;
        cplx[k][0] = spec.re[k] * damp;
        cplx[k][1] = spec.im[k] * damp;
    }
    fftw_execute_dft_c2r(st.backward, cplx, real);
    std::copy(real, real + st.grid.nodes(), out.begin());
    fftw_free(real);
    fftw_free(cplx);
}

Field HeatSemigroup::apply(const Field& u, double s) const {
    if (!(s >= 0.0)) {
        raise(ErrorCode::InvalidArgument, "heat time must be non-negative");
    }
    if (!(u.grid() == impl_->grid)) {
        raise(ErrorCode::InvalidArgument, "field grid does not match the semigroup");
    }
    if (s == 0.0) {
        return u;
    }
    Field out(u.grid(), u.components());
    for (int c = 0; c < u.components(); ++c) {
        evaluate(transform(u.plane(c)), s, out.plane(c));
    }
    return out;
}

Field heat_semigroup(const Field& u, double s) {
    return HeatSemigroup(u.grid()).apply(u, s);
}

double strichartz_ratio(const Field& u, double p, const StrichartzOptions& options) {
    if (u.components() != 1) {
        raise(ErrorCode::InvalidArgument, "strichartz_ratio expects a scalar field");
    }
    if (!(p > 2.0)) {
        raise(ErrorCode::InvalidArgument, "strichartz exponent must exceed 2");
    }
    const double l2 = lp_norm(u, 2.0);
    if (!(l2 > 0.0)) {
        raise(ErrorCode::ZeroInput, "strichartz_ratio of the zero field");
    }
    if (options.s_points < 4) {
        raise(ErrorCode::InvalidArgument, "strichartz quadrature needs at least 4 points");
    }
    const Grid2& g = u.grid();
    const HeatSemigroup heat(g);
    const HeatSemigroup::Spectrum spec = heat.transform(u.plane(0));
    const auto& symbol = heat.symbol();

    // The slowest decaying mode present fixes the horizon; a nonzero mean
    // never decays and the integral diverges.
    double amplitude_sum = 0.0;
    double max_amp = 0.0;
    for (std::size_t k = 0; k < symbol.size(); ++k) {
        max_amp = std::max(max_amp, std::hypot(spec.re[k], spec.im[k]));
    }
    double slowest = 0.0;
    bool has_mean = false;
    for (std::size_t k = 0; k < symbol.size(); ++k) {
        const double amp = std::hypot(spec.re[k], spec.im[k]);
        if (amp <= 1e-14 * max_amp) {
            continue;
        }
        amplitude_sum += 2.0 * amp;
        if (symbol[k] == 0.0) {
            has_mean = true;
        } else if (slowest == 0.0 || symbol[k] > slowest) {
            slowest = symbol[k];
        }
    }
    if (has_mean) {
        return std::numeric_limits<double>::infinity();
    }

    const double sup0 = sup_norm(u);
    const double norm = 1.0 / static_cast<double>(g.nodes());
    const double s_end = std::log(amplitude_sum * norm / (options.decay_floor * sup0)) / -slowest;
    const double s_min = 1e-4 * g.dx() * g.dx();
    const double weight_exp = 1.0 - 2.0 / p; // s^{-2/p} ds = s^{1-2/p} d(log s)

    Field buf(g, 1);
    auto norm_p = [&](double s) {
        heat.evaluate(spec, s, buf.plane(0));
        return lp_norm(buf, p);
    };

    const int k = options.s_points;
    const double t0 = std::log(s_min);
    const double h = (std::log(std::max(s_end, 2.0 * s_min)) - t0) / (k - 1);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        const double s = std::exp(t0 + i * h);
        const double np = norm_p(s);
        const double v = std::pow(s, weight_exp) * np * np;
        sum += (i == 0 || i == k - 1) ? 0.5 * v : v;
    }
    sum *= h;
    // Near s = 0 the semigroup is the identity to first order.
    const double lp0 = lp_norm(u, p);
    sum += lp0 * lp0 * std::pow(s_min, weight_exp) / weight_exp;
    return sum / (l2 * l2);
}

void write_field_csv(std::ostream& out, const Field& f) {
    const Grid2& g = f.grid();
    out << "N,L,components\n" << g.n << ',' << g.length << ',' << f.components() << '\n';
    out << "i,j";
    for (int c = 0; c < f.components(); ++c) {
        out << ",v" << c;
    }
    out << '\n';
    std::ostringstream row;
    row.precision(17);
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            row.str({});
            row << i << ',' << j;
            for (int c = 0; c < f.components(); ++c) {
                row << ',' << f.at(c, i, j);
            }
            out << row.str() << '\n';
        }
    }
}

Field read_field_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "N,L,components") {
        raise(ErrorCode::InvalidArgument, "missing field CSV header");
    }
    int n = 0;
    double length = 0.0;
    int comps = 0;
    char sep = 0;
    if (!std::getline(in, line)) {
        raise(ErrorCode::InvalidArgument, "missing grid line");
    }
    std::istringstream head(line);
    head >> n >> sep >> length >> sep >> comps;
    const Grid2 g(n, length);
    Field f(g, comps);
    std::getline(in, line); // column names
    for (std::size_t node = 0; node < g.nodes(); ++node) {
        if (!std::getline(in, line)) {
            raise(ErrorCode::InvalidArgument, "field CSV truncated");
        }
        std::istringstream row(line);
        int i = 0;
        int j = 0;
        row >> i >> sep >> j;
        for (int c = 0; c < comps; ++c) {
            row >> sep >> f.at(c, i, j);
        }
    }
    return f;
}

} // namespace hmflow
