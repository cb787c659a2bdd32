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

#include "hmflow/energyspace.hpp"

#include "hmflow/errors.hpp"
#include "hmflow/pipeline.hpp"
#include "kernels.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace hmflow {

bool ResolutionData::all_finite() const {
    for (const Field& f : psi_s) {
        if (!f.all_finite()) {
            return false;
        }
    }
    return psi_x0[0].all_finite() && psi_x0[1].all_finite();
}

std::array<Field, 2> edge_derivative_fields(const FrameField& frame, const MapField& phi) {
    const Grid2& g = phi.grid();
    const int m = frame.m;
    const int d = frame.d;
    const bool embedded = phi.target().is_embedded();
    const std::vector<double> cf = detail::metric_factors(phi);
    std::array<Field, 2> out{Field(g, m), Field(g, m)};
    std::vector<double> v(d);
    for (int axis = 0; axis < 2; ++axis) {
        const Field fwd = forward_difference(phi.values(), axis);
        const Field shifted = axis == 0 ? shift(phi.values(), -1, 0) : shift(phi.values(), 0, -1);
        for (std::size_t q = 0; q < g.nodes(); ++q) {
            double chord2 = 0.0;
            double pv = 0.0;
            for (int c = 0; c < d; ++c) {
                v[c] = fwd.at(c, q);
                chord2 += v[c] * v[c];
                pv += v[c] * phi.values().at(c, q);
            }
            double weight = 1.0;
            if (embedded) {
                for (int c = 0; c < d; ++c) {
                    v[c] -= pv * phi.values().at(c, q);
                }
            } else {
                double r2 = 0.0;
                for (int c = 0; c < d; ++c) {
                    r2 += shifted.at(c, q) * shifted.at(c, q);
                }
                const double next_c = 4.0 / ((1.0 - r2) * (1.0 - r2));
                weight = 0.5 * (cf[q] + next_c);
            }
            double norm2 = 0.0;
            for (int a = 0; a < m; ++a) {
                double s = 0.0;
                for (int c = 0; c < d; ++c) {
                    s += frame.vectors.at(a * d + c, q) * v[c];
                }
                out[axis].at(a, q) = cf[q] * s;
                norm2 += cf[q] * s * cf[q] * s;
            }
            const double target = weight * chord2;
            const double scale = norm2 > 0.0 ? std::sqrt(target / norm2) : 0.0;
            for (int a = 0; a < m; ++a) {
                out[axis].at(a, q) *= scale;
            }
        }
    }
    return out;
}

namespace {

double squared_integral(const Field& f) {
    double sum = 0.0;
    for (double v : f.data()) {
        sum += v * v;
    }
    const double dx = f.grid().dx();
    return sum * dx * dx;
}

std::vector<double> trapezoid_weights(const std::vector<double>& s) {
    std::vector<double> w(s.size(), 0.0);
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double h = 0.5 * (s[i] - s[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    return w;
}

void check_compatible(const ResolutionData& a, const ResolutionData& b) {
    if (a.m != b.m || a.s.size() != b.s.size() || a.psi_s.size() != b.psi_s.size() ||
        !(a.psi_x0[0].grid() == b.psi_x0[0].grid())) {
        raise(ErrorCode::ScheduleMismatch, "resolution data live on different grids or schedules");
    }
    for (std::size_t i = 0; i < a.s.size(); ++i) {
        if (std::abs(a.s[i] - b.s[i]) > 1e-12 * std::max(1.0, std::abs(a.s[i]))) {
            raise(ErrorCode::ScheduleMismatch, "resolution data sampled at different s");
        }
    }
}

// Weighted inner-product matrix M = sum w b a^T over all samples and nodes.
Mat cross_matrix(const ResolutionData& a, const ResolutionData& b) {
    const int m = a.m;
    Mat mm = Mat::Zero(m, m);
    const double dx = a.psi_x0[0].grid().dx();
    auto accumulate = [&](const Field& fa, const Field& fb, double w) {
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                double sum = 0.0;
                const auto pb = fb.plane(r);
                const auto pa = fa.plane(c);
                for (std::size_t q = 0; q < pb.size(); ++q) {
                    sum += pb[q] * pa[q];
                }
                mm(r, c) += w * sum;
            }
        }
    };
    const std::vector<double> w = trapezoid_weights(a.s);
    for (std::size_t i = 0; i < a.psi_s.size(); ++i) {
        accumulate(a.psi_s[i], b.psi_s[i], 0.5 * w[i] * dx * dx);
    }
    for (int j = 0; j < 2; ++j) {
        accumulate(a.psi_x0[j], b.psi_x0[j], 0.25 * dx * dx);
    }
    return mm;
}

double quadratic_form(const ResolutionData& d) {
    const std::vector<double> w = trapezoid_weights(d.s);
    double sum = 0.0;
    for (std::size_t i = 0; i < d.psi_s.size(); ++i) {
        sum += 0.5 * w[i] * squared_integral(d.psi_s[i]);
    }
    return sum + 0.25 * (squared_integral(d.psi_x0[0]) + squared_integral(d.psi_x0[1]));
}

Field rotate_by(const Field& psi, const Mat& q) {
    const int m = psi.components();
    Field out(psi.grid(), m);
    for (std::size_t n = 0; n < psi.plane_size(); ++n) {
        for (int b = 0; b < m; ++b) {
            double s = 0.0;
            for (int a = 0; a < m; ++a) {
                s += q(a, b) * psi.at(a, n);
            }
            out.at(b, n) = s;
        }
    }
    return out;
}

// Squared distance with d1 rotated by the best Q; not symmetric in rounding.
double one_sided_distance2(const ResolutionData& d1, const ResolutionData& d2) {
    const int m = d1.m;
    // <Q^T a, b> = tr(Q M) with M = sum b a^T; the maximizer is the
    // special orthogonal polar factor of M^T.
    const Mat mt = cross_matrix(d1, d2).transpose();
    Eigen::JacobiSVD<Mat> svd(mt, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat fix = Mat::Identity(m, m);
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
        fix(m - 1, m - 1) = -1.0;
    }
    const Mat q = svd.matrixU() * fix * svd.matrixV().transpose();
    ResolutionData diff = rotate_data(d1, q);
    for (std::size_t i = 0; i < diff.psi_s.size(); ++i) {
        diff.psi_s[i] -= d2.psi_s[i];
    }
    for (int j = 0; j < 2; ++j) {
        diff.psi_x0[j] -= d2.psi_x0[j];
    }
    return quadratic_form(diff);
}

} // namespace

double dissipation_integral(const ResolutionData& data) {
    const std::vector<double> w = trapezoid_weights(data.s);
    double sum = 0.0;
    for (std::size_t i = 0; i < data.psi_s.size(); ++i) {
        sum += w[i] * squared_integral(data.psi_s[i]);
    }
    return sum;
}

LValue l_norm(const ResolutionData& data) {
    return LValue{quadratic_form(data)};
}

IdentityCheck energy_identity_check(const ResolutionData& data, double initial_energy, double final_energy,
                                    double stop_fraction) {
    IdentityCheck out;
    out.dissipation = dissipation_integral(data);
    out.energy_drop = initial_energy - final_energy;
    out.l_norm = l_norm(data).value;
    if (initial_energy > 0.0) {
        out.gap = std::abs(out.dissipation - out.energy_drop) / initial_energy;
        out.lemma_gap = std::abs(out.l_norm - initial_energy) / initial_energy;
    } else {
        out.gap = std::abs(out.dissipation - out.energy_drop);
        out.lemma_gap = std::abs(out.l_norm);
    }
    out.lemma_applies = final_energy <= stop_fraction * initial_energy;
    return out;
}

ResolutionData rotate_data(const ResolutionData& data, const Mat& q) {
    if (q.rows() != data.m || q.cols() != data.m) {
        raise(ErrorCode::InvalidArgument, "rotation size does not match the data");
    }
    ResolutionData out;
    out.m = data.m;
    out.s = data.s;
    out.psi_s.reserve(data.psi_s.size());
    for (const Field& f : data.psi_s) {
        out.psi_s.push_back(rotate_by(f, q));
    }
    out.psi_x0 = {rotate_by(data.psi_x0[0], q), rotate_by(data.psi_x0[1], q)};
    return out;
}

double so_distance(const ResolutionData& d1, const ResolutionData& d2) {
    check_compatible(d1, d2);
    // Floating-point addition commutes, so averaging both orders gives an
    // exactly symmetric value.
    const double sym = 0.5 * (one_sided_distance2(d1, d2) + one_sided_distance2(d2, d1));
    return std::sqrt(std::max(sym, 0.0));
}

namespace {

bool same_time(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

ResolutionData resample(const ResolutionData& d, const std::vector<double>& times) {
    ResolutionData out;
    out.m = d.m;
    out.s = times;
    out.psi_x0 = d.psi_x0;
    const Grid2& g = d.psi_x0[0].grid();
    std::size_t k = 0;
    for (double t : times) {
        while (k + 1 < d.s.size() && d.s[k + 1] <= t && !same_time(d.s[k], t)) {
            ++k;
        }
        if (same_time(d.s[k], t)) {
            out.psi_s.push_back(d.psi_s[k]);
        } else if (t > d.s.back()) {
            out.psi_s.emplace_back(g, d.m);
        } else {
            const double w = (t - d.s[k]) / (d.s[k + 1] - d.s[k]);
            out.psi_s.push_back((1.0 - w) * d.psi_s[k] + w * d.psi_s[k + 1]);
        }
    }
    return out;
}

} // namespace

std::pair<ResolutionData, ResolutionData> common_schedule(const ResolutionData& d1, const ResolutionData& d2) {
    if (d1.m != d2.m || !(d1.psi_x0[0].grid() == d2.psi_x0[0].grid()) || d1.s.empty() || d2.s.empty() ||
        d1.s.size() != d1.psi_s.size() || d2.s.size() != d2.psi_s.size()) {
        raise(ErrorCode::ScheduleMismatch, "resolution data live on different grids or are empty");
    }
    std::vector<double> times;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < d1.s.size() || j < d2.s.size()) {
        double t = 0.0;
        if (j == d2.s.size() || (i < d1.s.size() && d1.s[i] <= d2.s[j])) {
            t = d1.s[i++];
        } else {
            t = d2.s[j++];
        }
        if (times.empty() || !same_time(times.back(), t)) {
            times.push_back(t);
        }
    }
    return {resample(d1, times), resample(d2, times)};
}

ResolutionData resolution_map(const MapField& phi0, const ReferenceFrame& reference, const CaloricOptions& options) {
    CaloricOptions opts = options;
    opts.reference = reference;
    opts.alternate.reset();
    CaloricRun run = run_caloric(phi0, opts);
    if (!run.primary.normalized) {
        raise(ErrorCode::NotConverged, "flow did not reach the energy criterion before s_max");
    }
    return run.primary.resolution;
}

} // namespace hmflow
