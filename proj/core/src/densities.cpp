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

#include "hmflow/densities.hpp"

#include "hmflow/errors.hpp"
#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace hmflow {

Field covariant_derivative(const Field& section, const MapField& phi, int axis) {
    detail::check_tangent_section(phi, section);
    const Field raw = detail::raw_derivative(phi, axis);
    if (phi.target().is_embedded()) {
        return detail::covariant_derivative(section, phi, raw, nullptr, axis);
    }
    const Field dw = detail::chart_dw(phi);
    return detail::covariant_derivative(section, phi, raw, &dw, axis);
}

CovariantJet covariant_jet(const MapField& phi, int order) {
    if (order < 1) {
        raise(ErrorCode::InvalidArgument, "jet order must be at least 1");
    }
    CovariantJet jet;
    jet.order = order;
    const std::array<Field, 2> raw = {detail::raw_derivative(phi, 0), detail::raw_derivative(phi, 1)};
    std::optional<Field> dw;
    if (!phi.target().is_embedded()) {
        dw = detail::chart_dw(phi);
    }
    const Field* dwp = dw ? &*dw : nullptr;
    jet.entries.push_back({detail::first_derivative(phi, 0), detail::first_derivative(phi, 1)});
    for (int k = 2; k <= order; ++k) {
        const auto& prev = jet.entries.back();
        std::vector<Field> next(prev.size() * 2);
        for (int j1 = 0; j1 < 2; ++j1) {
            for (std::size_t idx = 0; idx < prev.size(); ++idx) {
                next[j1 * prev.size() + idx] = detail::covariant_derivative(prev[idx], phi, raw[j1], dwp, j1);
            }
        }
        jet.entries.push_back(std::move(next));
    }
    return jet;
}

Field energy_density(const MapField& phi) {
    Field e(phi.grid(), 1);
    detail::one_sided_density(phi, e.plane(0));
    return e;
}

double energy(const MapField& phi) {
    return 0.5 * integrate(energy_density(phi));
}

DensityStack density_stack(const MapField& phi, int order, double s) {
    if (order < 1) {
        raise(ErrorCode::InvalidArgument, "density order must be at least 1");
    }
    DensityStack stack;
    stack.s = s;
    stack.e.push_back(energy_density(phi));
    if (order >= 2) {
        const CovariantJet jet = covariant_jet(phi, order);
        const std::vector<double> cf = detail::metric_factors(phi);
        for (int k = 2; k <= order; ++k) {
            Field ek(phi.grid(), 1);
            auto out = ek.plane(0);
            for (const Field& entry : jet.entries[k - 1]) {
                for (int c = 0; c < entry.components(); ++c) {
                    auto pl = entry.plane(c);
                    for (std::size_t q = 0; q < pl.size(); ++q) {
                        out[q] += pl[q] * pl[q];
                    }
                }
            }
            for (std::size_t q = 0; q < out.size(); ++q) {
                out[q] *= cf[q];
            }
            stack.e.push_back(std::move(ek));
        }
    }
    for (const Field& ek : stack.e) {
        stack.E.push_back(integrate(ek));
    }
    return stack;
}

void EnergySeries::append(EnergySample sample) {
    if (!samples.empty() && !(sample.s > samples.back().s)) {
        raise(ErrorCode::InvalidArgument, "energy samples must have increasing s");
    }
    samples.push_back(std::move(sample));
}

EnergySample summarize(const DensityStack& stack, const MapField& /*phi*/) {
    EnergySample out;
    out.s = stack.s;
    out.E = stack.E;
    for (const Field& ek : stack.e) {
        out.sup_e.push_back(sup_norm(ek));
    }
    out.sup_grad = std::sqrt(out.sup_e.front());
    Field sq = stack.e.front();
    for (double& v : sq.data()) {
        v *= v;
    }
    out.e1_squared = integrate(sq);
    return out;
}

std::vector<double> e_norm_partial(const EnergySeries& series) {
    std::vector<double> out;
    double acc = 0.0;
    for (std::size_t i = 0; i < series.samples.size(); ++i) {
        if (i > 0) {
            const auto& a = series.samples[i - 1];
            const auto& b = series.samples[i];
            acc += 0.5 * (b.s - a.s) * (a.e1_squared + b.e1_squared);
        }
        out.push_back(std::pow(acc, 0.25));
    }
    return out;
}

double e_norm(const EnergySeries& series) {
    const auto partial = e_norm_partial(series);
    return partial.empty() ? 0.0 : partial.back();
}

double monotonicity_violation(const EnergySeries& series) {
    double worst = 0.0;
    for (std::size_t i = 1; i < series.samples.size(); ++i) {
        worst = std::max(worst, series.samples[i].E[0] - series.samples[i - 1].E[0]);
    }
    return 0.5 * worst;
}

Field bochner_curvature_term(const MapField& phi) {
    const Field d1 = detail::first_derivative(phi, 0);
    const Field d2 = detail::first_derivative(phi, 1);
    const std::vector<double> cf = detail::metric_factors(phi);
    const double kappa = phi.target().curvature_sign();
    Field out(phi.grid(), 1);
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        double a = 0.0;
        double b = 0.0;
        double ab = 0.0;
        for (int c = 0; c < d1.components(); ++c) {
            a += d1.at(c, q) * d1.at(c, q);
            b += d2.at(c, q) * d2.at(c, q);
            ab += d1.at(c, q) * d2.at(c, q);
        }
        // sum_ij <R(X_i, X_j) X_j, X_i> = 2 kappa (|X_1|^2 |X_2|^2 - <X_1, X_2>^2).
        out.at(0, q) = 2.0 * 2.0 * kappa * cf[q] * cf[q] * (a * b - ab * ab);
    }
    return out;
}

Field bochner_residual_k1(const std::vector<MapField>& slices, double ds) {
    if (slices.size() < 3) {
        raise(ErrorCode::InsufficientHistory, "Bochner residual needs three consecutive slices");
    }
    const MapField& prev = slices[slices.size() - 3];
    const MapField& cur = slices[slices.size() - 2];
    const MapField& next = slices[slices.size() - 1];
    const Field e_prev = energy_density(prev);
    const Field e_next = energy_density(next);
    const DensityStack stack = density_stack(cur, 2);
    const Field lap = laplacian(stack.e[0]);
    const Field curv = bochner_curvature_term(cur);
    Field out(cur.grid(), 1);
    for (std::size_t q = 0; q < cur.grid().nodes(); ++q) {
        const double ds_e1 = (e_next.at(0, q) - e_prev.at(0, q)) / (2.0 * ds);
        out.at(0, q) = ds_e1 - lap.at(0, q) + 2.0 * stack.e[1].at(0, q) - curv.at(0, q);
    }
    return out;
}

double diamagnetic_violation(const DensityStack& stack, int k, double eps) {
    if (k < 1 || static_cast<int>(stack.e.size()) < k + 1) {
        raise(ErrorCode::InvalidArgument, "diamagnetic check needs densities up to order k + 1");
    }
    Field root = stack.e[k - 1];
    for (double& v : root.data()) {
        v = std::sqrt(eps * eps + v);
    }
    const auto grad = gradient(root);
    const Field& upper = stack.e[k];
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < upper.plane_size(); ++q) {
        const double lhs = std::hypot(grad[0].at(0, q), grad[1].at(0, q));
        worst = std::max(worst, lhs - std::sqrt(upper.at(0, q)));
    }
    return worst;
}

double local_energy(const MapField& phi, std::array<double, 2> x0, double radius) {
    const Grid2& g = phi.grid();
    if (!(radius >= 2.0 * g.dx())) {
        raise(ErrorCode::InvalidArgument, "local energy radius must be at least two cells");
    }
    const Field e = energy_density(phi);
    const double L = g.length;
    auto periodic = [L](double d) { return d - L * std::round(d / L); };
    double sum = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double dx1 = periodic(g.coord(i) - x0[0]);
        for (int j = 0; j < g.n; ++j) {
            const double dx2 = periodic(g.coord(j) - x0[1]);
            if (dx1 * dx1 + dx2 * dx2 < radius * radius) {
                sum += e.at(0, i, j);
            }
        }
    }
    return 0.5 * sum * g.dx() * g.dx();
}

ConcentrationTerms concentration_check(const MapField& phi0, const MapField& phi_s, double initial_energy,
                                       std::array<double, 2> x0, double radius, double s) {
    ConcentrationTerms t;
    t.lhs = local_energy(phi_s, x0, radius);
    t.local_initial = local_energy(phi0, x0, 2.0 * radius);
    t.scaled_time = s * initial_energy / (radius * radius);
    return t;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        raise(ErrorCode::InvalidArgument, "slope fit needs at least two points");
    }
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

const DecayFit& DecayReport::fit(const std::string& quantity) const {
    for (const DecayFit& f : fits) {
        if (f.quantity == quantity) {
            return f;
        }
    }
    raise(ErrorCode::InvalidArgument, "no fit named " + quantity);
}

namespace {

double interpolate_at(const EnergySeries& series, double s, double (*get)(const EnergySample&)) {
    const auto& sm = series.samples;
    for (std::size_t i = 1; i < sm.size(); ++i) {
        if (sm[i].s >= s) {
            const double t = (s - sm[i - 1].s) / (sm[i].s - sm[i - 1].s);
            return (1.0 - t) * get(sm[i - 1]) + t * get(sm[i]);
        }
    }
    return get(sm.back());
}

} // namespace

DecayReport decay_report(const EnergySeries& series, double s_lo, double s_hi) {
    const auto& sm = series.samples;
    if (sm.empty() || !(s_hi >= 10.0 * s_lo * (1.0 - 1e-9)) || sm.back().s < s_hi * (1.0 - 1e-6) ||
        sm.front().s > s_lo) {
        raise(ErrorCode::InsufficientSpan, "series must span a decade of s past s_lo");
    }
    DecayReport rep;
    rep.s_lo = s_lo;
    rep.s_hi = s_hi;
    const int order = static_cast<int>(sm.front().E.size());
    std::vector<double> xs;
    std::vector<std::size_t> window;
    for (std::size_t i = 0; i < sm.size(); ++i) {
        if (sm[i].s >= s_lo * (1.0 - 1e-12) && sm[i].s <= s_hi * (1.0 + 1e-12)) {
            xs.push_back(sm[i].s);
            window.push_back(i);
        }
    }
    if (window.size() < 2) {
        raise(ErrorCode::InsufficientSpan, "too few samples in the fit window");
    }
    for (int k = 1; k <= order; ++k) {
        std::vector<double> sup;
        std::vector<double> total;
        for (std::size_t i : window) {
            sup.push_back(sm[i].sup_e[k - 1]);
            total.push_back(sm[i].E[k - 1]);
        }
        rep.fits.push_back({"sup_e" + std::to_string(k), loglog_slope(xs, sup), -static_cast<double>(k)});
        rep.fits.push_back({"E" + std::to_string(k), loglog_slope(xs, total), -static_cast<double>(k - 1)});
    }
    for (std::size_t i : window) {
        rep.max_s_sup_e1 = std::max(rep.max_s_sup_e1, sm[i].s * sm[i].sup_e[0]);
    }
    if (order >= 2) {
        const double at_lo = interpolate_at(series, s_lo, [](const EnergySample& e) { return e.s * e.E[1]; });
        double mx = 0.0;
        for (const auto& e : sm) {
            mx = std::max(mx, e.s * e.E[1]);
        }
        rep.s_e2_growth = at_lo > 0.0 ? mx / at_lo : 0.0;
    }
    for (int k = 1; k <= order; ++k) {
        double acc_sup = 0.0;
        double acc_e = 0.0;
        for (std::size_t i = 1; i < sm.size(); ++i) {
            const double h = sm[i].s - sm[i - 1].s;
            auto w = [k](double s) { return std::pow(s, k - 1); };
            acc_sup += 0.5 * h * (w(sm[i - 1].s) * sm[i - 1].sup_e[k - 1] + w(sm[i].s) * sm[i].sup_e[k - 1]);
            if (k < order) {
                acc_e += 0.5 * h * (w(sm[i - 1].s) * sm[i - 1].E[k] + w(sm[i].s) * sm[i].E[k]);
            }
        }
        rep.sup_accumulation.push_back(acc_sup);
        if (k < order) {
            rep.e_accumulation.push_back(acc_e);
        }
    }
    return rep;
}

} // namespace hmflow
