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

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hmflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Unit sphere S^m inside R^{m+1}.
///
/// Second fundamental form convention: <Pi(X,Y), N> = <d_X N, Y>, so that
/// Pi(p)(X,Y) = <X,Y> p.  Curvature convention:
/// R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.
class EmbeddedTarget {
public:
    explicit EmbeddedTarget(int m);

    int intrinsic_dim() const {
        return m_;
    }
    int ambient_dim() const {
        return m_ + 1;
    }

    /// |v| - 1; the zero set is the sphere.
    double point_constraint(const Vec& v) const;
    Mat tangent_projector(const Vec& p) const;
    Vec second_fundamental(const Vec& p, const Vec& x, const Vec& y) const;
    Vec curvature_op(const Vec& p, const Vec& x, const Vec& y, const Vec& z) const;
    bool is_tangent(const Vec& p, const Vec& x, double tol = 1e-8) const;

    /// Retraction radius: inputs with |v| <= 0.5 are rejected.
    static constexpr double kRetractRadius = 0.5;

private:
    int m_;
};

/// Hyperbolic space in the Poincare ball chart, h = 4 delta / (1 - |u|^2)^2.
class ChartedTarget {
public:
    explicit ChartedTarget(int m = 2);

    int intrinsic_dim() const {
        return m_;
    }

    bool in_chart_domain(const Vec& u) const;
    /// The scalar c(u) with h(u) = c(u) * Identity.
    double conformal_factor(const Vec& u) const;
    Mat metric(const Vec& u) const;
    /// gamma[c](a, b) = Gamma^c_{ab}(u).
    std::vector<Mat> christoffel(const Vec& u) const;
    /// R^c_{abd}(u) with R(X,Y)Z = R^c_{abd} X^a Y^b Z^d e_c.
    double curvature_component(const Vec& u, int c, int a, int b, int d) const;
    Vec curvature_op(const Vec& u, const Vec& x, const Vec& y, const Vec& z) const;

    static constexpr double kChartMargin = 0.999;

private:
    void check_domain(const Vec& u) const;

    int m_;
};

class TargetManifold {
public:
    using Backend = std::variant<EmbeddedTarget, ChartedTarget>;

    TargetManifold(Backend backend, std::string name, int curvature_sign,
                   std::optional<double> energy_threshold = std::nullopt);

    const std::string& name() const {
        return name_;
    }
    int curvature_sign() const {
        return curvature_sign_;
    }
    const std::optional<double>& energy_threshold() const {
        return energy_threshold_;
    }

    bool is_embedded() const {
        return std::holds_alternative<EmbeddedTarget>(backend_);
    }
    const EmbeddedTarget& embedded() const {
        return std::get<EmbeddedTarget>(backend_);
    }
    const ChartedTarget& charted() const {
        return std::get<ChartedTarget>(backend_);
    }

    int intrinsic_dim() const;
    /// Number of stored coordinates per point: ambient for embedded targets,
    /// chart coordinates otherwise.
    int point_dim() const;
    /// Default value at spatial infinity: the last ambient axis on the sphere,
    /// the chart origin on the hyperbolic ball.
    Vec base_point() const;

    /// Scalar c(p) such that the metric at p is c(p) times the Euclidean
    /// inner product on stored coordinates.
    double metric_factor(const Vec& p) const;
    double inner(const Vec& p, const Vec& x, const Vec& y) const;

    bool operator==(const TargetManifold& other) const {
        return name_ == other.name_;
    }

private:
    Backend backend_;
    std::string name_;
    int curvature_sign_;
    std::optional<double> energy_threshold_;
};

TargetManifold sphere_target(int m);
TargetManifold hyperbolic_target();
/// "sphere:m" or "h2"; anything else raises ConfigError.
TargetManifold parse_target(std::string_view spec);

Vec retract(const TargetManifold& t, const Vec& v);
Vec curvature_apply(const TargetManifold& t, const Vec& p, const Vec& x, const Vec& y, const Vec& z);

} // namespace hmflow
