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

#include "hmflow/gauge.hpp"

#include "hmflow/densities.hpp"
#include "hmflow/errors.hpp"
#include "kernels.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hmflow {

Vec FrameField::vector(std::size_t node, int a) const {
    Vec v(d);
    for (int c = 0; c < d; ++c) {
        v(c) = vectors.at(a * d + c, node);
    }
    return v;
}

void FrameField::set_vector(std::size_t node, int a, const Vec& v) {
    for (int c = 0; c < d; ++c) {
        vectors.at(a * d + c, node) = v(c);
    }
}

namespace {

// Column a of `e` is frame vector a (d x m); metric factor g.
// Returns e (g e^T e)^{-1/2} and the determinant of the Gram matrix.
double polar_in_place(Mat& e, double g) {
    const int m = static_cast<int>(e.cols());
    if (m == 2) {
        const double a = g * e.col(0).squaredNorm();
        const double b = g * e.col(0).dot(e.col(1));
        const double d = g * e.col(1).squaredNorm();
        const double det = a * d - b * b;
        if (!(det > 0.0)) {
            return det;
        }
        // sqrt of a 2x2 SPD matrix: (G + sqrt(det) I) / sqrt(tr G + 2 sqrt(det)).
        const double sd = std::sqrt(det);
        const double t = std::sqrt(a + d + 2.0 * sd);
        const double p = (a + sd) / t;
        const double q = b / t;
        const double r = (d + sd) / t;
        const double inv = 1.0 / (p * r - q * q);
        const double i11 = r * inv;
        const double i12 = -q * inv;
        const double i22 = p * inv;
        for (Eigen::Index c = 0; c < e.rows(); ++c) {
            const double x = e(c, 0);
            const double y = e(c, 1);
            e(c, 0) = i11 * x + i12 * y;
            e(c, 1) = i12 * x + i22 * y;
        }
        return det;
    }
    const Mat gram = g * e.transpose() * e;
    const double det = gram.determinant();
    if (!(det > 0.0)) {
        return det;
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
    const Mat inv_sqrt = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                         eig.eigenvectors().transpose();
    e = e * inv_sqrt;
    return det;
}

Mat load_frame(const FrameField& f, std::size_t node) {
    Mat e(f.d, f.m);
    for (int a = 0; a < f.m; ++a) {
        for (int c = 0; c < f.d; ++c) {
            e(c, a) = f.vectors.at(a * f.d + c, node);
        }
    }
    return e;
}

void store_frame(FrameField& f, std::size_t node, const Mat& e) {
    for (int a = 0; a < f.m; ++a) {
        for (int c = 0; c < f.d; ++c) {
            f.vectors.at(a * f.d + c, node) = e(c, a);
        }
    }
}

double orientation(const Mat& e, const Vec& p, bool embedded) {
    if (embedded) {
        Mat full(e.rows(), e.cols() + 1);
        full << e, p;
        return full.determinant();
    }
    return e.determinant();
}

std::vector<Vec> default_axes(const TargetManifold& t, int first) {
    std::vector<Vec> axes;
    for (int a = 0; a < t.intrinsic_dim(); ++a) {
        Vec v = Vec::Zero(t.point_dim());
        v((a + first) % t.point_dim()) = 1.0;
        axes.push_back(v);
    }
    return axes;
}

Mat project_axes(const std::vector<Vec>& axes, const Vec& p, bool embedded) {
    Mat e(p.size(), static_cast<Eigen::Index>(axes.size()));
    for (std::size_t a = 0; a < axes.size(); ++a) {
        Vec v = axes[a];
        if (embedded) {
            v -= v.dot(p) * p;
        }
        e.col(static_cast<Eigen::Index>(a)) = v;
    }
    return e;
}

// Per-node matrix helpers; entry (r, c) of an m x m matrix field lives in
// component r * m + c.
Field matvec(const Field& a, const Field& v, int m) {
    Field out(v.grid(), m);
    for (std::size_t q = 0; q < v.plane_size(); ++q) {
        for (int r = 0; r < m; ++r) {
            double s = 0.0;
            for (int c = 0; c < m; ++c) {
                s += a.at(r * m + c, q) * v.at(c, q);
            }
            out.at(r, q) = s;
        }
    }
    return out;
}

Field matmul(const Field& a, const Field& b, int m) {
    Field out(a.grid(), m * m);
    for (std::size_t q = 0; q < a.plane_size(); ++q) {
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                double s = 0.0;
                for (int k = 0; k < m; ++k) {
                    s += a.at(r * m + k, q) * b.at(k * m + c, q);
                }
                out.at(r * m + c, q) = s;
            }
        }
    }
    return out;
}

Field skew_part(const Field& a, int m) {
    Field out(a.grid(), m * m);
    for (std::size_t q = 0; q < a.plane_size(); ++q) {
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                out.at(r * m + c, q) = 0.5 * (a.at(r * m + c, q) - a.at(c * m + r, q));
            }
        }
    }
    return out;
}

// D_j v = d_j v + A_j v.
Field covariant_d(const Field& v, const Field& a, int m, int axis) {
    return central_difference(v, axis) + matvec(a, v, m);
}

// M_{ba} = g <X_a, e_b> for a stack X of m tangent vectors.
Field overlap(const FrameField& frame, const Field& stack, const std::vector<double>& cf) {
    const int m = frame.m;
    const int d = frame.d;
    Field out(frame.grid(), m * m);
    for (std::size_t q = 0; q < frame.grid().nodes(); ++q) {
        for (int b = 0; b < m; ++b) {
            for (int a = 0; a < m; ++a) {
                double s = 0.0;
                for (int c = 0; c < d; ++c) {
                    s += frame.vectors.at(b * d + c, q) * stack.at(a * d + c, q);
                }
                out.at(b * m + a, q) = cf[q] * s;
            }
        }
    }
    return out;
}

double sup_of(const Field& f) {
    return sup_norm(f);
}

} // namespace

ReferenceFrame default_reference_frame(const TargetManifold& target) {
    ReferenceFrame ref;
    ref.point = target.base_point();
    Mat e = project_axes(default_axes(target, 0), ref.point, target.is_embedded());
    polar_in_place(e, target.metric_factor(ref.point));
    ref.vectors = e;
    return ref;
}

ReferenceFrame rotate_reference(const ReferenceFrame& ref, const Mat& q) {
    ReferenceFrame out = ref;
    out.vectors = ref.vectors * q;
    return out;
}

FrameField initial_frame(const MapField& phi, const FrameChoice& choice) {
    const TargetManifold& t = phi.target();
    const int m = t.intrinsic_dim();
    const int d = phi.point_dim();
    const bool embedded = t.is_embedded();
    const std::vector<Vec> axes = choice.axes.empty() ? default_axes(t, 0) : choice.axes;
    const std::vector<Vec> fallback = choice.fallback_axes.empty() ? default_axes(t, 1) : choice.fallback_axes;
    if (static_cast<int>(axes.size()) != m || static_cast<int>(fallback.size()) != m) {
        raise(ErrorCode::InvalidArgument, "frame choice needs exactly m axes");
    }
    const std::vector<double> cf = detail::metric_factors(phi);
    FrameField frame{m, d, Field(phi.grid(), m * d)};
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        const Vec p = phi.point(q);
        Mat e = project_axes(axes, p, embedded);
        // Relative Gram determinant: 1 for orthonormal projections.
        const double scale = std::pow(cf[q], m);
        Mat trial = e;
        double det = polar_in_place(trial, cf[q]);
        if (!(det > 1e-6 * scale)) {
            trial = project_axes(fallback, p, embedded);
            det = polar_in_place(trial, cf[q]);
            if (!(det > 1e-6 * scale)) {
                raise(ErrorCode::DegenerateFrame, "axes project to a degenerate set at a node");
            }
        }
        if (orientation(trial, p, embedded) < 0.0) {
            trial.col(m - 1) *= -1.0;
        }
        store_frame(frame, q, trial);
    }
    return frame;
}

namespace {

// Surface targets with at most 8 stored coordinates: plain loops on stack
// buffers, no Eigen temporaries.
void transport_surface(FrameField& frame, const MapField& phi, const MapField& phi_next) {
    const int d = frame.d;
    const bool embedded = phi.target().is_embedded();
    const Field& p0 = phi.values();
    const Field& p1 = phi_next.values();
    Field& ev = frame.vectors;
    double mid[8], delta[8], next[8], dw[8], r[8], e0[8], e1[8];
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        double mid2 = 0.0;
        double next2 = 0.0;
        for (int c = 0; c < d; ++c) {
            next[c] = p1.at(c, q);
            delta[c] = next[c] - p0.at(c, q);
            mid[c] = 0.5 * (next[c] + p0.at(c, q));
            e0[c] = ev.at(c, q);
            e1[c] = ev.at(d + c, q);
            mid2 += mid[c] * mid[c];
            next2 += next[c] * next[c];
        }
        double g = 1.0;
        if (embedded) {
            double a0 = 0.0;
            double a1 = 0.0;
            for (int c = 0; c < d; ++c) {
                a0 += e0[c] * delta[c];
                a1 += e1[c] * delta[c];
            }
            double b0 = 0.0;
            double b1 = 0.0;
            for (int c = 0; c < d; ++c) {
                e0[c] -= a0 * mid[c];
                e1[c] -= a1 * mid[c];
                b0 += e0[c] * next[c];
                b1 += e1[c] * next[c];
            }
            for (int c = 0; c < d; ++c) {
                e0[c] -= b0 * next[c];
                e1[c] -= b1 * next[c];
            }
        } else {
            const double inv_gap = 2.0 / (1.0 - mid2);
            for (int c = 0; c < d; ++c) {
                dw[c] = inv_gap * mid[c];
            }
            detail::chart_gamma(dw, delta, e0, r, d);
            for (int c = 0; c < d; ++c) {
                e0[c] -= r[c];
            }
            detail::chart_gamma(dw, delta, e1, r, d);
            for (int c = 0; c < d; ++c) {
                e1[c] -= r[c];
            }
            const double gap = 1.0 - next2;
            if (!(gap > 1.0 - ChartedTarget::kChartMargin * ChartedTarget::kChartMargin)) {
                raise(ErrorCode::ChartOverflow, "frame transport left the chart domain");
            }
            g = 4.0 / (gap * gap);
        }
        double a = 0.0;
        double b = 0.0;
        double dd = 0.0;
        for (int c = 0; c < d; ++c) {
            a += e0[c] * e0[c];
            b += e0[c] * e1[c];
            dd += e1[c] * e1[c];
        }
        a *= g;
        b *= g;
        dd *= g;
        const double det = a * dd - b * b;
        if (!(det > 0.25 * g * g)) {
            raise(ErrorCode::DegenerateFrame, "frame transport step collapsed the frame");
        }
        const double sd = std::sqrt(det);
        const double t = std::sqrt(a + dd + 2.0 * sd);
        const double pp = (a + sd) / t;
        const double qq = b / t;
        const double rr = (dd + sd) / t;
        const double inv = 1.0 / (pp * rr - qq * qq);
        const double i11 = rr * inv;
        const double i12 = -qq * inv;
        const double i22 = pp * inv;
        for (int c = 0; c < d; ++c) {
            ev.at(c, q) = i11 * e0[c] + i12 * e1[c];
            ev.at(d + c, q) = i12 * e0[c] + i22 * e1[c];
        }
    }
}

} // namespace

void transport_frame_in_place(FrameField& frame, const MapField& phi, const MapField& phi_next) {
    const int m = frame.m;
    const int d = frame.d;
    if (m == 2 && d <= 8) {
        transport_surface(frame, phi, phi_next);
        return;
    }
    const bool embedded = phi.target().is_embedded();
    const Field& p0 = phi.values();
    const Field& p1 = phi_next.values();
    Mat e(d, m);
    Vec mid(d), delta(d), next(d), dw(d), r(d), col(d);
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        for (int c = 0; c < d; ++c) {
            next(c) = p1.at(c, q);
            delta(c) = next(c) - p0.at(c, q);
            mid(c) = 0.5 * (next(c) + p0.at(c, q));
        }
        for (int a = 0; a < m; ++a) {
            for (int c = 0; c < d; ++c) {
                e(c, a) = frame.vectors.at(a * d + c, q);
            }
        }
        double g = 1.0;
        if (embedded) {
            for (int a = 0; a < m; ++a) {
                e.col(a) -= e.col(a).dot(delta) * mid;
                e.col(a) -= e.col(a).dot(next) * next;
            }
        } else {
            const double gap_mid = 1.0 - mid.squaredNorm();
            dw = 2.0 * mid / gap_mid;
            for (int a = 0; a < m; ++a) {
                col = e.col(a);
                detail::chart_gamma(dw.data(), delta.data(), col.data(), r.data(), d);
                e.col(a) -= r;
            }
            const double gap = 1.0 - next.squaredNorm();
            if (!(gap > 1.0 - ChartedTarget::kChartMargin * ChartedTarget::kChartMargin)) {
                raise(ErrorCode::ChartOverflow, "frame transport left the chart domain");
            }
            g = 4.0 / (gap * gap);
        }
        const double det = polar_in_place(e, g);
        if (!(det > 0.25 * std::pow(g, m))) {
            raise(ErrorCode::DegenerateFrame, "frame transport step collapsed the frame");
        }
        for (int a = 0; a < m; ++a) {
            for (int c = 0; c < d; ++c) {
                frame.vectors.at(a * d + c, q) = e(c, a);
            }
        }
    }
}

FrameField transport_frame(const FrameField& frame, const MapField& phi, const MapField& phi_next) {
    FrameField out = frame;
    transport_frame_in_place(out, phi, phi_next);
    return out;
}

double gram_defect(const FrameField& frame, const MapField& phi) {
    const std::vector<double> cf = detail::metric_factors(phi);
    double worst = 0.0;
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        const Mat e = load_frame(frame, q);
        const Mat gram = cf[q] * e.transpose() * e - Mat::Identity(frame.m, frame.m);
        worst = std::max(worst, gram.cwiseAbs().maxCoeff());
    }
    return worst;
}

double min_orientation(const FrameField& frame, const MapField& phi) {
    const std::vector<double> cf = detail::metric_factors(phi);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        const Mat e = load_frame(frame, q) * std::sqrt(cf[q]);
        worst = std::min(worst, orientation(e, phi.point(q), phi.target().is_embedded()));
    }
    return worst;
}

Field frame_components(const FrameField& frame, const MapField& phi, const Field& tangent) {
    const std::vector<double> cf = detail::metric_factors(phi);
    const int m = frame.m;
    const int d = frame.d;
    Field out(phi.grid(), m);
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        for (int a = 0; a < m; ++a) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) {
                s += frame.vectors.at(a * d + c, q) * tangent.at(c, q);
            }
            out.at(a, q) = cf[q] * s;
        }
    }
    return out;
}

GaugeFields gauge_fields(const FrameField& frame, const MapField& phi, double s) {
    GaugeFields out;
    out.s = s;
    const std::vector<double> cf = detail::metric_factors(phi);
    std::optional<Field> dw;
    if (!phi.target().is_embedded()) {
        dw = detail::chart_dw(phi);
    }
    for (int j = 0; j < 2; ++j) {
        out.psi_x[j] = frame_components(frame, phi, detail::first_derivative(phi, j));
        const Field raw = detail::raw_derivative(phi, j);
        const Field de = detail::covariant_derivative(frame.vectors, phi, raw, dw ? &*dw : nullptr, j);
        out.a_x[j] = skew_part(overlap(frame, de, cf), frame.m);
    }
    out.psi_s = frame_components(frame, phi, tension(phi));
    return out;
}

Field pullback_curvature(const Field& u, const Field& v, int kappa) {
    const int m = u.components();
    Field out(u.grid(), m * m);
    for (std::size_t q = 0; q < u.plane_size(); ++q) {
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                out.at(r * m + c, q) = kappa * (u.at(r, q) * v.at(c, q) - v.at(r, q) * u.at(c, q));
            }
        }
    }
    return out;
}

CurvaturePair curvature_F(const GaugeFields& fields, const MapField& phi) {
    const int m = fields.psi_s.components();
    CurvaturePair out;
    out.direct = central_difference(fields.a_x[1], 0) - central_difference(fields.a_x[0], 1) +
                 matmul(fields.a_x[0], fields.a_x[1], m) - matmul(fields.a_x[1], fields.a_x[0], m);
    out.pullback = pullback_curvature(fields.psi_x[0], fields.psi_x[1], phi.target().curvature_sign());
    return out;
}

namespace {

void fill_slice_residuals(GaugeResiduals& r, const GaugeFields& f, const MapField& phi) {
    const int m = f.psi_s.components();
    const Field d1psi2 = covariant_d(f.psi_x[1], f.a_x[0], m, 0);
    const Field d2psi1 = covariant_d(f.psi_x[0], f.a_x[1], m, 1);
    r.torsion = sup_of(d1psi2 - d2psi1);
    const Field div = covariant_d(f.psi_x[0], f.a_x[0], m, 0) + covariant_d(f.psi_x[1], f.a_x[1], m, 1);
    r.frame_heat = sup_of(f.psi_s - div);
    const CurvaturePair F = curvature_F(f, phi);
    r.f_mismatch = sup_of(F.direct - F.pullback);

    Field both(phi.grid(), 2 * m * m);
    for (int j = 0; j < 2; ++j) {
        for (int c = 0; c < m * m; ++c) {
            std::copy(f.a_x[j].plane(c).begin(), f.a_x[j].plane(c).end(), both.plane(j * m * m + c).begin());
        }
    }
    r.sup_a_x = sup_of(both);
    r.l2_a_x = lp_norm(both, 2.0);

    double skew = 0.0;
    for (int j = 0; j < 2; ++j) {
        for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
            for (int a = 0; a < m; ++a) {
                for (int b = 0; b < m; ++b) {
                    skew = std::max(skew, std::abs(f.a_x[j].at(a * m + b, q) + f.a_x[j].at(b * m + a, q)));
                }
            }
        }
    }
    r.skew = skew;

    const std::vector<double> cf = detail::metric_factors(phi);
    double iso = 0.0;
    for (int j = 0; j < 2; ++j) {
        const Field dphi = detail::first_derivative(phi, j);
        const Field a = pointwise_norm(f.psi_x[j]);
        const Field b = pointwise_norm(dphi);
        for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
            iso = std::max(iso, std::abs(a.at(0, q) - std::sqrt(cf[q]) * b.at(0, q)));
        }
    }
    r.isometry = iso;
}

} // namespace

GaugeResiduals slice_residuals(const GaugeSlice& slice) {
    GaugeResiduals r;
    r.s = slice.s;
    const GaugeFields f = gauge_fields(slice.frame, slice.phi, slice.s);
    fill_slice_residuals(r, f, slice.phi);
    return r;
}

GaugeResiduals eom_residuals(const std::vector<GaugeSlice>& slices, double ds) {
    if (slices.size() < 3) {
        raise(ErrorCode::InsufficientHistory, "gauge residuals need three consecutive slices");
    }
    const GaugeSlice& s0 = slices[slices.size() - 3];
    const GaugeSlice& s1 = slices[slices.size() - 2];
    const GaugeSlice& s2 = slices[slices.size() - 1];
    const GaugeFields f0 = gauge_fields(s0.frame, s0.phi, s0.s);
    const GaugeFields f1 = gauge_fields(s1.frame, s1.phi, s1.s);
    const GaugeFields f2 = gauge_fields(s2.frame, s2.phi, s2.s);
    const MapField& phi = s1.phi;
    const int m = s1.frame.m;
    const int d = s1.frame.d;
    const int kappa = phi.target().curvature_sign();
    const double inv2 = 1.0 / (2.0 * ds);

    GaugeResiduals r;
    r.s = s1.s;
    fill_slice_residuals(r, f1, phi);

    // A_s: skew part of g <nabla_s e_a, e_b> with centred s-differences.
    {
        Field ds_e = inv2 * (s2.frame.vectors - s0.frame.vectors);
        if (!phi.target().is_embedded()) {
            const Field ds_phi = inv2 * (s2.phi.values() - s0.phi.values());
            const Field dw = detail::chart_dw(phi);
            std::vector<double> w(d), x(d), y(d), out(d);
            for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
                for (int c = 0; c < d; ++c) {
                    w[c] = dw.at(c, q);
                    x[c] = ds_phi.at(c, q);
                }
                for (int a = 0; a < m; ++a) {
                    for (int c = 0; c < d; ++c) {
                        y[c] = s1.frame.vectors.at(a * d + c, q);
                    }
                    detail::chart_gamma(w.data(), x.data(), y.data(), out.data(), d);
                    for (int c = 0; c < d; ++c) {
                        ds_e.at(a * d + c, q) += out[c];
                    }
                }
            }
        }
        r.sup_a_s = sup_of(skew_part(overlap(s1.frame, ds_e, detail::metric_factors(phi)), m));
    }

    double eom1 = 0.0;
    double eom2 = 0.0;
    double eom3x = 0.0;
    for (int j = 0; j < 2; ++j) {
        const Field dpsi = inv2 * (f2.psi_x[j] - f0.psi_x[j]);
        eom1 = std::max(eom1, sup_of(dpsi - covariant_d(f1.psi_s, f1.a_x[j], m, j)));

        const Field da = inv2 * (f2.a_x[j] - f0.a_x[j]);
        eom2 = std::max(eom2, sup_of(da - pullback_curvature(f1.psi_s, f1.psi_x[j], kappa)));

        Field rhs(phi.grid(), m);
        for (int i = 0; i < 2; ++i) {
            const Field di = covariant_d(f1.psi_x[j], f1.a_x[i], m, i);
            rhs += covariant_d(di, f1.a_x[i], m, i);
            rhs += matvec(pullback_curvature(f1.psi_x[j], f1.psi_x[i], kappa), f1.psi_x[i], m);
        }
        eom3x = std::max(eom3x, sup_of(dpsi - rhs));
    }
    {
        const Field dpsi = inv2 * (f2.psi_s - f0.psi_s);
        Field rhs(phi.grid(), m);
        for (int i = 0; i < 2; ++i) {
            const Field di = covariant_d(f1.psi_s, f1.a_x[i], m, i);
            rhs += covariant_d(di, f1.a_x[i], m, i);
            rhs += matvec(pullback_curvature(f1.psi_s, f1.psi_x[i], kappa), f1.psi_x[i], m);
        }
        r.eom3_s = sup_of(dpsi - rhs);
    }
    r.eom1 = eom1;
    r.eom2 = eom2;
    r.eom3_x = eom3x;
    return r;
}

FrameField projected_reference(const MapField& phi, const ReferenceFrame& ref) {
    const TargetManifold& t = phi.target();
    const int m = t.intrinsic_dim();
    const int d = phi.point_dim();
    const std::vector<double> cf = detail::metric_factors(phi);
    std::vector<Vec> axes;
    for (int a = 0; a < m; ++a) {
        axes.push_back(ref.vectors.col(a));
    }
    FrameField out{m, d, Field(phi.grid(), m * d)};
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        Mat e = project_axes(axes, phi.point(q), t.is_embedded());
        const double det = polar_in_place(e, cf[q]);
        if (!(det > 1e-6 * std::pow(cf[q], m))) {
            raise(ErrorCode::NotConverged, "reference frame degenerates at the final slice");
        }
        store_frame(out, q, e);
    }
    return out;
}

Field procrustes_alignment(const FrameField& frame, const MapField& phi, const ReferenceFrame& ref) {
    const FrameField target = projected_reference(phi, ref);
    const std::vector<double> cf = detail::metric_factors(phi);
    const int m = frame.m;
    Field u(phi.grid(), m * m);
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        const Mat e = load_frame(frame, q);
        const Mat t = load_frame(target, q);
        const Mat mm = cf[q] * e.transpose() * t;
        Mat rot(m, m);
        if (m == 2) {
            const double th = std::atan2(mm(1, 0) - mm(0, 1), mm(0, 0) + mm(1, 1));
            rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        } else {
            Eigen::JacobiSVD<Mat> svd(mm, Eigen::ComputeFullU | Eigen::ComputeFullV);
            Mat fix = Mat::Identity(m, m);
            fix(m - 1, m - 1) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
            rot = svd.matrixU() * fix * svd.matrixV().transpose();
        }
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                u.at(r * m + c, q) = rot(r, c);
            }
        }
    }
    return u;
}

FrameField apply_gauge(const FrameField& frame, const Field& u) {
    const int m = frame.m;
    const int d = frame.d;
    FrameField out{m, d, Field(frame.grid(), m * d)};
    for (std::size_t q = 0; q < frame.grid().nodes(); ++q) {
        for (int b = 0; b < m; ++b) {
            for (int c = 0; c < d; ++c) {
                double s = 0.0;
                for (int a = 0; a < m; ++a) {
                    s += frame.vectors.at(a * d + c, q) * u.at(a * m + b, q);
                }
                out.vectors.at(b * d + c, q) = s;
            }
        }
    }
    return out;
}

Field rotate_components(const Field& psi, const Field& u) {
    const int m = psi.components();
    Field out(psi.grid(), m);
    for (std::size_t q = 0; q < psi.plane_size(); ++q) {
        for (int b = 0; b < m; ++b) {
            double s = 0.0;
            for (int a = 0; a < m; ++a) {
                s += u.at(a * m + b, q) * psi.at(a, q);
            }
            out.at(b, q) = s;
        }
    }
    return out;
}

std::array<Field, 2> transform_connection(const FrameField& frame, const MapField& phi, const Field& u) {
    const Grid2& g = phi.grid();
    const int m = frame.m;
    const int d = frame.d;
    const std::vector<double> cf = detail::metric_factors(phi);
    std::optional<Field> dw;
    if (!phi.target().is_embedded()) {
        dw = detail::chart_dw(phi);
    }
    const detail::Wrap wrap(g.n);
    const double h = 1.0 / (2.0 * g.dx());
    std::array<Field, 2> out;
    for (int axis = 0; axis < 2; ++axis) {
        const Field raw = detail::raw_derivative(phi, axis);
        Field full(g, m * m);
        Mat wp(m, m), wm(m, m), gm(m, m), up(m, m), um(m, m), u0(m, m);
        std::vector<double> gam(d);
        for (int i = 0; i < g.n; ++i) {
            for (int j = 0; j < g.n; ++j) {
                const std::size_t q = g.index(i, j);
                const std::size_t qp = axis == 0 ? g.index(wrap.next[i], j) : g.index(i, wrap.next[j]);
                const std::size_t qm = axis == 0 ? g.index(wrap.prev[i], j) : g.index(i, wrap.prev[j]);
                for (int b = 0; b < m; ++b) {
                    for (int k = 0; k < m; ++k) {
                        double sp = 0.0;
                        double sm = 0.0;
                        for (int c = 0; c < d; ++c) {
                            const double eb = frame.vectors.at(b * d + c, q);
                            sp += eb * frame.vectors.at(k * d + c, qp);
                            sm += eb * frame.vectors.at(k * d + c, qm);
                        }
                        wp(b, k) = cf[q] * sp;
                        wm(b, k) = cf[q] * sm;
                        gm(b, k) = 0.0;
                    }
                }
                if (dw) {
                    std::vector<double> w(d), x(d), y(d);
                    for (int c = 0; c < d; ++c) {
                        w[c] = dw->at(c, q);
                        x[c] = raw.at(c, q);
                    }
                    for (int k = 0; k < m; ++k) {
                        for (int c = 0; c < d; ++c) {
                            y[c] = frame.vectors.at(k * d + c, q);
                        }
                        detail::chart_gamma(w.data(), x.data(), y.data(), gam.data(), d);
                        for (int b = 0; b < m; ++b) {
                            double s = 0.0;
                            for (int c = 0; c < d; ++c) {
                                s += frame.vectors.at(b * d + c, q) * gam[c];
                            }
                            gm(b, k) = cf[q] * s;
                        }
                    }
                }
                for (int r = 0; r < m; ++r) {
                    for (int c = 0; c < m; ++c) {
                        up(r, c) = u.at(r * m + c, qp);
                        um(r, c) = u.at(r * m + c, qm);
                        u0(r, c) = u.at(r * m + c, q);
                    }
                }
                const Mat mprime = u0.transpose() * (h * (wp * up - wm * um) + gm * u0);
                for (int r = 0; r < m; ++r) {
                    for (int c = 0; c < m; ++c) {
                        full.at(r * m + c, q) = mprime(r, c);
                    }
                }
            }
        }
        out[axis] = skew_part(full, m);
    }
    return out;
}

RotationCheck check_rotation_field(const Field& u, int m) {
    RotationCheck out;
    out.min_det = std::numeric_limits<double>::infinity();
    Mat r(m, m);
    for (std::size_t q = 0; q < u.plane_size(); ++q) {
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                r(a, b) = u.at(a * m + b, q);
            }
        }
        out.orthogonality =
            std::max(out.orthogonality, (r.transpose() * r - Mat::Identity(m, m)).cwiseAbs().maxCoeff());
        out.min_det = std::min(out.min_det, r.determinant());
    }
    return out;
}

GaugeHistory caloric_normalize(const GaugeHistory& history, const ReferenceFrame& ref, double initial_energy,
                               double final_energy, double stop_fraction) {
    if (history.slices.empty()) {
        raise(ErrorCode::InsufficientHistory, "normalization needs at least one slice");
    }
    if (!(final_energy <= stop_fraction * initial_energy)) {
        raise(ErrorCode::NotConverged, "final energy above the stopping level");
    }
    const GaugeSlice& last = history.slices.back();
    const Field u = procrustes_alignment(last.frame, last.phi, ref);
    GaugeHistory out;
    out.u = u;
    for (const GaugeSlice& sl : history.slices) {
        GaugeSlice ns{sl.s, sl.phi, apply_gauge(sl.frame, u)};
        out.samples.push_back(gauge_fields(ns.frame, ns.phi, ns.s));
        out.slices.push_back(std::move(ns));
    }
    return out;
}

NormalizationError normalization_error(const FrameField& frame, const MapField& phi, const ReferenceFrame& ref) {
    const FrameField target = projected_reference(phi, ref);
    NormalizationError err;
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        for (int a = 0; a < frame.m; ++a) {
            const Vec e = frame.vector(q, a);
            err.to_projected = std::max(err.to_projected, (e - target.vector(q, a)).norm());
            err.to_reference = std::max(err.to_reference, (e - ref.vectors.col(a)).norm());
        }
    }
    return err;
}

namespace {

// int over [a, b] of s^{-1/2} times the linear interpolant of (fa, fb).
double weighted_segment(double a, double b, double fa, double fb) {
    const double h = b - a;
    if (!(h > 0.0)) {
        return 0.0;
    }
    const double ra = std::sqrt(a);
    const double rb = std::sqrt(b);
    const double i0 = 2.0 * (rb - ra);                         // int s^{-1/2}
    const double i1 = (2.0 / 3.0) * (rb * b - ra * a) - a * i0; // int (s - a) s^{-1/2}
    return fa * i0 + (fb - fa) / h * i1;
}

} // namespace

ConnectionDecayReport connection_decay_report(const GaugeHistory& history, double s_lo, double s_hi) {
    ConnectionDecayReport rep;
    if (history.samples.empty() || history.samples.back().s < s_hi * (1.0 - 1e-6) ||
        history.samples.front().s > s_lo) {
        raise(ErrorCode::InsufficientSpan, "gauge history must span the fit window");
    }
    for (const GaugeFields& f : history.samples) {
        const int m = f.psi_s.components();
        const int mm = m * m;
        Field a(f.a_x[0].grid(), 2 * mm);
        Field da(f.a_x[0].grid(), 4 * mm);
        for (int j = 0; j < 2; ++j) {
            for (int c = 0; c < mm; ++c) {
                std::copy(f.a_x[j].plane(c).begin(), f.a_x[j].plane(c).end(), a.plane(j * mm + c).begin());
            }
            for (int i = 0; i < 2; ++i) {
                const Field di = central_difference(f.a_x[j], i);
                for (int c = 0; c < mm; ++c) {
                    std::copy(di.plane(c).begin(), di.plane(c).end(), da.plane((2 * j + i) * mm + c).begin());
                }
            }
        }
        rep.s.push_back(f.s);
        rep.sup_a.push_back(sup_norm(a));
        rep.l2_a.push_back(lp_norm(a, 2.0));
        rep.sup_da.push_back(sup_norm(da));
        rep.l2_da.push_back(lp_norm(da, 2.0));
    }
    std::vector<double> xs, y1, y2, y3;
    for (std::size_t i = 0; i < rep.s.size(); ++i) {
        if (rep.s[i] >= s_lo * (1.0 - 1e-12) && rep.s[i] <= s_hi * (1.0 + 1e-12)) {
            xs.push_back(rep.s[i]);
            y1.push_back(rep.sup_a[i]);
            y2.push_back(rep.l2_a[i]);
            y3.push_back(rep.sup_da[i]);
        }
    }
    if (xs.size() < 2) {
        raise(ErrorCode::InsufficientSpan, "too few gauge samples in the fit window");
    }
    rep.slope_sup_a = loglog_slope(xs, y1);
    rep.slope_l2_a = loglog_slope(xs, y2);
    rep.slope_sup_da = loglog_slope(xs, y3);
    double tail = 0.0;
    for (std::size_t i = 1; i < rep.s.size(); ++i) {
        rep.int_sup_a += weighted_segment(rep.s[i - 1], rep.s[i], rep.sup_a[i - 1], rep.sup_a[i]);
        const double seg = weighted_segment(rep.s[i - 1], rep.s[i], rep.l2_da[i - 1], rep.l2_da[i]);
        rep.int_l2_da += seg;
        if (rep.s[i - 1] >= s_hi * (1.0 - 1e-12)) {
            tail += seg;
        }
    }
    rep.tail_l2_da = rep.int_l2_da > 0.0 ? tail / rep.int_l2_da : 0.0;
    return rep;
}

} // namespace hmflow
