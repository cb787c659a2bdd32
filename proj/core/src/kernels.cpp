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

#include "kernels.hpp"

#include "hmflow/errors.hpp"

#include <cmath>

namespace hmflow::detail {

Wrap::Wrap(int n) : prev(n), next(n) {
    for (int i = 0; i < n; ++i) {
        prev[i] = (i + n - 1) % n;
        next[i] = (i + 1) % n;
    }
}

namespace {

constexpr double kMinChartGap = 1.0 - ChartedTarget::kChartMargin * ChartedTarget::kChartMargin;

double chart_gap(const Field& values, std::size_t node) {
    double r2 = 0.0;
    for (int c = 0; c < values.components(); ++c) {
        const double v = values.at(c, node);
        r2 += v * v;
    }
    const double gap = 1.0 - r2;
    if (!(gap >= kMinChartGap)) {
        raise(ErrorCode::ChartOverflow, "chart point outside |u| <= 0.999");
    }
    return gap;
}

} // namespace

std::vector<double> metric_factors(const MapField& phi) {
    const std::size_t nodes = phi.grid().nodes();
    std::vector<double> c(nodes, 1.0);
    if (!phi.target().is_embedded()) {
        for (std::size_t k = 0; k < nodes; ++k) {
            const double gap = chart_gap(phi.values(), k);
            c[k] = 4.0 / (gap * gap);
        }
    }
    return c;
}

Field chart_dw(const MapField& phi) {
    const Field& v = phi.values();
    Field dw(phi.grid(), v.components());
    for (std::size_t k = 0; k < phi.grid().nodes(); ++k) {
        const double gap = chart_gap(v, k);
        for (int c = 0; c < v.components(); ++c) {
            dw.at(c, k) = 2.0 * v.at(c, k) / gap;
        }
    }
    return dw;
}

Field raw_derivative(const MapField& phi, int axis) {
    return central_difference(phi.values(), axis);
}

Field first_derivative(const MapField& phi, int axis) {
    Field d = raw_derivative(phi, axis);
    if (phi.target().is_embedded()) {
        const Field& p = phi.values();
        const int dim = p.components();
        for (std::size_t k = 0; k < phi.grid().nodes(); ++k) {
            double dot = 0.0;
            for (int c = 0; c < dim; ++c) {
                dot += p.at(c, k) * d.at(c, k);
            }
            for (int c = 0; c < dim; ++c) {
                d.at(c, k) -= dot * p.at(c, k);
            }
        }
    }
    return d;
}

Field covariant_derivative(const Field& section, const MapField& phi, const Field& raw_dphi,
                           const Field* dw, int axis) {
    const int dim = phi.point_dim();
    if (section.components() % dim != 0) {
        raise(ErrorCode::InvalidArgument, "section width is not a multiple of the point dimension");
    }
    const int groups = section.components() / dim;
    Field out = central_difference(section, axis);
    const Field& p = phi.values();
    const std::size_t nodes = phi.grid().nodes();
    if (phi.target().is_embedded()) {
        for (int g = 0; g < groups; ++g) {
            for (std::size_t k = 0; k < nodes; ++k) {
                double dot = 0.0;
                for (int c = 0; c < dim; ++c) {
                    dot += p.at(c, k) * out.at(g * dim + c, k);
                }
                for (int c = 0; c < dim; ++c) {
                    out.at(g * dim + c, k) -= dot * p.at(c, k);
                }
            }
        }
        return out;
    }
    if (dw == nullptr) {
        raise(ErrorCode::InvalidArgument, "charted covariant derivative needs the connection field");
    }
    std::vector<double> w(dim), x(dim), y(dim), r(dim);
    for (std::size_t k = 0; k < nodes; ++k) {
        for (int c = 0; c < dim; ++c) {
            w[c] = dw->at(c, k);
            x[c] = raw_dphi.at(c, k);
        }
        for (int g = 0; g < groups; ++g) {
            for (int c = 0; c < dim; ++c) {
                y[c] = section.at(g * dim + c, k);
            }
            chart_gamma(w.data(), x.data(), y.data(), r.data(), dim);
            for (int c = 0; c < dim; ++c) {
                out.at(g * dim + c, k) += r[c];
            }
        }
    }
    return out;
}

void one_sided_density(const MapField& phi, std::span<double> out) {
    const Grid2& g = phi.grid();
    const Field& v = phi.values();
    const int n = g.n;
    const int dim = v.components();
    const double inv = 0.5 / (g.dx() * g.dx());
    const Wrap w(n);
    const std::vector<double> cf = metric_factors(phi);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::size_t k = g.index(i, j);
            const std::size_t nb[4] = {g.index(w.prev[i], j), g.index(w.next[i], j), g.index(i, w.prev[j]),
                                       g.index(i, w.next[j])};
            double sum = 0.0;
            for (int c = 0; c < dim; ++c) {
                auto pl = v.plane(c);
                const double center = pl[k];
                for (std::size_t q : nb) {
                    const double d = pl[q] - center;
                    sum += d * d;
                }
            }
            out[k] = cf[k] * sum * inv;
        }
    }
}

void tension_into(const TargetManifold& target, const Field& values, Field& out) {
    const Grid2& g = values.grid();
    const int n = g.n;
    const int dim = values.components();
    const double inv = 1.0 / (g.dx() * g.dx());
    const Wrap w(n);
    const bool embedded = target.is_embedded();
    double buf_d[8][4];
    double center[8];
    if (dim > 8) {
        raise(ErrorCode::InvalidArgument, "target dimension too large for the tension kernel");
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::size_t k = g.index(i, j);
            const std::size_t nb[4] = {g.index(w.prev[i], j), g.index(w.next[i], j), g.index(i, w.prev[j]),
                                       g.index(i, w.next[j])};
            double sq = 0.0;
            for (int c = 0; c < dim; ++c) {
                auto pl = values.plane(c);
                center[c] = pl[k];
                for (int q = 0; q < 4; ++q) {
                    buf_d[c][q] = pl[nb[q]] - center[c];
                    sq += buf_d[c][q] * buf_d[c][q];
                }
            }
            if (embedded) {
                // Laplacian plus Pi(phi)(d phi, d phi) = <d phi, d phi> phi.
                const double coef = 0.5 * sq * inv;
                for (int c = 0; c < dim; ++c) {
                    const double lap = (buf_d[c][0] + buf_d[c][1] + buf_d[c][2] + buf_d[c][3]) * inv;
                    out.at(c, k) = lap + coef * center[c];
                }
            } else {
                double r2 = 0.0;
                for (int c = 0; c < dim; ++c) {
                    r2 += center[c] * center[c];
                }
                const double gap = 1.0 - r2;
                if (!(gap >= kMinChartGap)) {
                    raise(ErrorCode::ChartOverflow, "chart point outside |u| <= 0.999");
                }
                // Gamma^c_{ab} Q^{ab} with Q the averaged one-sided quadratic form.
                double dwq[8] = {0.0};
                double dw[8];
                for (int c = 0; c < dim; ++c) {
                    dw[c] = 2.0 * center[c] / gap;
                }
                for (int q = 0; q < 4; ++q) {
                    double wd = 0.0;
                    for (int c = 0; c < dim; ++c) {
                        wd += dw[c] * buf_d[c][q];
                    }
                    for (int c = 0; c < dim; ++c) {
                        dwq[c] += wd * buf_d[c][q];
                    }
                }
                const double trq = 0.5 * sq * inv;
                for (int c = 0; c < dim; ++c) {
                    const double lap = (buf_d[c][0] + buf_d[c][1] + buf_d[c][2] + buf_d[c][3]) * inv;
                    out.at(c, k) = lap + 2.0 * (0.5 * dwq[c] * inv) - trq * dw[c];
                }
            }
        }
    }
}

void check_tangent_section(const MapField& phi, const Field& section, double tol) {
    if (!phi.target().is_embedded()) {
        return;
    }
    const int dim = phi.point_dim();
    const int groups = section.components() / dim;
    const Field& p = phi.values();
    for (std::size_t k = 0; k < phi.grid().nodes(); ++k) {
        for (int g = 0; g < groups; ++g) {
            double dot = 0.0;
            double len = 0.0;
            for (int c = 0; c < dim; ++c) {
                const double s = section.at(g * dim + c, k);
                dot += p.at(c, k) * s;
                len += s * s;
            }
            if (std::abs(dot) > tol * (1.0 + std::sqrt(len))) {
                raise(ErrorCode::NonTangentSection, "section has a normal component");
            }
        }
    }
}

} // namespace hmflow::detail
