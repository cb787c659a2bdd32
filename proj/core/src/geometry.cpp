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

#include "hmflow/geometry.hpp"

#include "hmflow/errors.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

namespace hmflow {

EmbeddedTarget::EmbeddedTarget(int m) : m_(m) {
    if (m < 1) {
        raise(ErrorCode::InvalidArgument, "sphere dimension must be at least 1");
    }
}

double EmbeddedTarget::point_constraint(const Vec& v) const {
    return v.norm() - 1.0;
}

Mat EmbeddedTarget::tangent_projector(const Vec& p) const {
    return Mat::Identity(ambient_dim(), ambient_dim()) - p * p.transpose();
}

Vec EmbeddedTarget::second_fundamental(const Vec& p, const Vec& x, const Vec& y) const {
    return x.dot(y) * p;
}

bool EmbeddedTarget::is_tangent(const Vec& p, const Vec& x, double tol) const {
    return std::abs(p.dot(x)) <= tol * (1.0 + x.norm());
}

Vec EmbeddedTarget::curvature_op(const Vec& p, const Vec& x, const Vec& y, const Vec& z) const {
    if (!is_tangent(p, x) || !is_tangent(p, y) || !is_tangent(p, z)) {
        raise(ErrorCode::NonTangentInput, "curvature arguments must be tangent to the sphere");
    }
    return y.dot(z) * x - x.dot(z) * y;
}

ChartedTarget::ChartedTarget(int m) : m_(m) {
    if (m < 2) {
        raise(ErrorCode::InvalidArgument, "hyperbolic chart dimension must be at least 2");
    }
}

bool ChartedTarget::in_chart_domain(const Vec& u) const {
    return u.size() == m_ && u.allFinite() && u.norm() <= kChartMargin;
}

void ChartedTarget::check_domain(const Vec& u) const {
    if (!in_chart_domain(u)) {
        raise(ErrorCode::ChartOverflow, "chart point outside |u| <= 0.999");
    }
}

double ChartedTarget::conformal_factor(const Vec& u) const {
    check_domain(u);
    const double q = 1.0 - u.squaredNorm();
    return 4.0 / (q * q);
}

Mat ChartedTarget::metric(const Vec& u) const {
    return conformal_factor(u) * Mat::Identity(m_, m_);
}

std::vector<Mat> ChartedTarget::christoffel(const Vec& u) const {
    check_domain(u);
    // Conformal metric e^{2w} delta with dw = 2u / (1 - |u|^2).
    const Vec dw = 2.0 * u / (1.0 - u.squaredNorm());
    std::vector<Mat> gamma(m_, Mat::Zero(m_, m_));
    for (int c = 0; c < m_; ++c) {
        for (int a = 0; a < m_; ++a) {
            for (int b = 0; b < m_; ++b) {
                double v = 0.0;
                if (c == a) {
                    v += dw(b);
                }
                if (c == b) {
                    v += dw(a);
                }
                if (a == b) {
                    v -= dw(c);
                }
                gamma[c](a, b) = v;
            }
        }
    }
    return gamma;
}

double ChartedTarget::curvature_component(const Vec& u, int c, int a, int b, int d) const {
    // Constant curvature -1: R(X,Y)Z = -(h(Y,Z) X - h(X,Z) Y).
    const double g = conformal_factor(u);
    const double hbd = (b == d) ? g : 0.0;
    const double had = (a == d) ? g : 0.0;
    return -(hbd * (c == a ? 1.0 : 0.0) - had * (c == b ? 1.0 : 0.0));
}

Vec ChartedTarget::curvature_op(const Vec& u, const Vec& x, const Vec& y, const Vec& z) const {
    const double g = conformal_factor(u);
    return -(g * y.dot(z) * x - g * x.dot(z) * y);
}

TargetManifold::TargetManifold(Backend backend, std::string name, int curvature_sign,
                               std::optional<double> energy_threshold)
    : backend_(std::move(backend)), name_(std::move(name)), curvature_sign_(curvature_sign),
      energy_threshold_(energy_threshold) {}

int TargetManifold::intrinsic_dim() const {
    return std::visit([](const auto& b) { return b.intrinsic_dim(); }, backend_);
}

int TargetManifold::point_dim() const {
    return is_embedded() ? embedded().ambient_dim() : charted().intrinsic_dim();
}

Vec TargetManifold::base_point() const {
    Vec p = Vec::Zero(point_dim());
    if (is_embedded()) {
        p(point_dim() - 1) = 1.0;
    }
    return p;
}

double TargetManifold::metric_factor(const Vec& p) const {
    return is_embedded() ? 1.0 : charted().conformal_factor(p);
}

double TargetManifold::inner(const Vec& p, const Vec& x, const Vec& y) const {
    return metric_factor(p) * x.dot(y);
}

TargetManifold sphere_target(int m) {
    // The least energy of a nontrivial harmonic map from the plane into S^m
    // (m >= 2) is that of the degree-one stereographic map, 4 pi.  For the
    // circle there is none.
    std::optional<double> threshold = std::numeric_limits<double>::infinity();
    if (m >= 2) {
        threshold = 4.0 * std::numbers::pi;
    }
    return TargetManifold(EmbeddedTarget(m), "sphere:" + std::to_string(m), +1, threshold);
}

TargetManifold hyperbolic_target() {
    return TargetManifold(ChartedTarget(2), "h2", -1, std::numeric_limits<double>::infinity());
}

TargetManifold parse_target(std::string_view spec) {
    if (spec == "h2") {
        return hyperbolic_target();
    }
    constexpr std::string_view prefix = "sphere:";
    if (spec.starts_with(prefix)) {
        const std::string_view digits = spec.substr(prefix.size());
        int m = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), m);
        if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty() && m >= 1) {
            return sphere_target(m);
        }
    }
    raise(ErrorCode::ConfigError, "unrecognised target '" + std::string(spec) + "'");
}

Vec retract(const TargetManifold& t, const Vec& v) {
    if (v.size() != t.point_dim() || !v.allFinite()) {
        raise(ErrorCode::RetractFailure, "input has wrong size or is not finite");
    }
    if (t.is_embedded()) {
        const double r = v.norm();
        if (r <= EmbeddedTarget::kRetractRadius) {
            raise(ErrorCode::RetractFailure, "point too close to the sphere centre");
        }
        return v / r;
    }
    if (!t.charted().in_chart_domain(v)) {
        raise(ErrorCode::RetractFailure, "point outside the chart domain");
    }
    return v;
}

Vec curvature_apply(const TargetManifold& t, const Vec& p, const Vec& x, const Vec& y, const Vec& z) {
    if (t.is_embedded()) {
        return t.embedded().curvature_op(p, x, y, z);
    }
    return t.charted().curvature_op(p, x, y, z);
}

} // namespace hmflow
