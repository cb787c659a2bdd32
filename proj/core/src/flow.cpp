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

#include "hmflow/flow.hpp"

#include "hmflow/densities.hpp"
#include "hmflow/errors.hpp"
#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hmflow {

MapField::MapField(const Grid2& grid, TargetManifold target)
    : target_(std::move(target)), values_(grid, target_.point_dim()), base_(target_.base_point()) {
    for (int c = 0; c < values_.components(); ++c) {
        std::fill(values_.plane(c).begin(), values_.plane(c).end(), base_(c));
    }
}

MapField::MapField(const Grid2& grid, TargetManifold target, Field values, Vec base_point)
    : target_(std::move(target)), values_(std::move(values)), base_(std::move(base_point)) {
    if (!(values_.grid() == grid) || values_.components() != target_.point_dim() ||
        base_.size() != target_.point_dim()) {
        raise(ErrorCode::InvalidArgument, "map values do not match the grid or target");
    }
}

Vec MapField::point(std::size_t node) const {
    Vec p(point_dim());
    for (int c = 0; c < point_dim(); ++c) {
        p(c) = values_.at(c, node);
    }
    return p;
}

void MapField::set_point(std::size_t node, const Vec& p) {
    for (int c = 0; c < point_dim(); ++c) {
        values_.at(c, node) = p(c);
    }
}

double constraint_violation(const MapField& phi) {
    const std::size_t nodes = phi.grid().nodes();
    double worst = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
        const Vec p = phi.point(k);
        if (phi.target().is_embedded()) {
            worst = std::max(worst, std::abs(p.norm() - 1.0));
        } else if (!phi.target().charted().in_chart_domain(p)) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return worst;
}

double boundary_band_deviation(const MapField& phi) {
    const Grid2& g = phi.grid();
    const double inner = 3.0 * g.length / 8.0;
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            if (std::max(std::abs(g.coord(i)), std::abs(g.coord(j))) < inner - 1e-12) {
                continue;
            }
            const std::size_t k = g.index(i, j);
            double d2 = 0.0;
            for (int c = 0; c < phi.point_dim(); ++c) {
                const double d = phi.values().at(c, k) - phi.base_point()(c);
                d2 += d * d;
            }
            worst = std::max(worst, std::sqrt(d2));
        }
    }
    return worst;
}

void StepControl::validate() const {
    if (!(cfl > 0.0 && cfl <= 0.25)) {
        raise(ErrorCode::InvalidArgument, "cfl fraction must lie in (0, 0.25]");
    }
    if (!(s_max > 0.0)) {
        raise(ErrorCode::InvalidArgument, "s_max must be positive");
    }
    if (!(stop_energy_fraction >= 0.0 && stop_energy_fraction < 1.0)) {
        raise(ErrorCode::InvalidArgument, "stop_energy_fraction must lie in [0, 1)");
    }
    if (!(blowup_factor > 1.0)) {
        raise(ErrorCode::InvalidArgument, "blowup_factor must exceed 1");
    }
}

Field tension(const MapField& phi) {
    Field out(phi.grid(), phi.point_dim());
    detail::tension_into(phi.target(), phi.values(), out);
    return out;
}

struct Stepper::Scratch {
    Field k1, k2, k3, k4, stage;
};

Stepper::Stepper(const MapField& like) : scratch_(std::make_unique<Scratch>()) {
    const Field zero(like.grid(), like.point_dim());
    scratch_->k1 = zero;
    scratch_->k2 = zero;
    scratch_->k3 = zero;
    scratch_->k4 = zero;
    scratch_->stage = zero;
}

Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;
Stepper& Stepper::operator=(Stepper&&) noexcept = default;

void Stepper::advance(FlowState& state) {
    Scratch& s = *scratch_;
    const TargetManifold& target = state.phi.target();
    std::vector<double>& y = state.phi.values().data();
    std::vector<double>& st = s.stage.data();
    const double h = state.ds;
    const std::size_t size = y.size();

    detail::tension_into(target, state.phi.values(), s.k1);
    for (std::size_t k = 0; k < size; ++k) {
        st[k] = y[k] + 0.5 * h * s.k1.data()[k];
    }
    detail::tension_into(target, s.stage, s.k2);
    for (std::size_t k = 0; k < size; ++k) {
        st[k] = y[k] + 0.5 * h * s.k2.data()[k];
    }
    detail::tension_into(target, s.stage, s.k3);
    for (std::size_t k = 0; k < size; ++k) {
        st[k] = y[k] + h * s.k3.data()[k];
    }
    detail::tension_into(target, s.stage, s.k4);
    for (std::size_t k = 0; k < size; ++k) {
        y[k] += h / 6.0 * (s.k1.data()[k] + 2.0 * s.k2.data()[k] + 2.0 * s.k3.data()[k] + s.k4.data()[k]);
    }

    Field& v = state.phi.values();
    const int dim = v.components();
    const std::size_t nodes = state.phi.grid().nodes();
    for (std::size_t k = 0; k < nodes; ++k) {
        double r2 = 0.0;
        for (int c = 0; c < dim; ++c) {
            r2 += v.at(c, k) * v.at(c, k);
        }
        if (!std::isfinite(r2)) {
            raise(ErrorCode::StepDiverged, "non-finite value after step");
        }
        if (target.is_embedded()) {
            const double r = std::sqrt(r2);
            if (r <= EmbeddedTarget::kRetractRadius) {
                raise(ErrorCode::StepDiverged, "node left the retraction radius");
            }
            for (int c = 0; c < dim; ++c) {
                v.at(c, k) /= r;
            }
        } else if (std::sqrt(r2) > ChartedTarget::kChartMargin) {
            raise(ErrorCode::ChartOverflow, "node left the chart domain");
        }
    }
    state.s += h;
    ++state.steps;
}

FlowState step(const FlowState& state, const StepControl& ctrl) {
    ctrl.validate();
    FlowState next = state;
    next.ds = ctrl.ds(state.phi.grid());
    Stepper stepper(state.phi);
    stepper.advance(next);
    return next;
}

double SampleSchedule::next_after(double s, double ds) const {
    if (s < linear_end) {
        const double spacing = linear_spacing > 0.0 ? linear_spacing : ds;
        return s + spacing * (1.0 - 1e-9);
    }
    return s * std::pow(10.0, 1.0 / per_decade) * (1.0 - 1e-12);
}

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::EnergyCriterion:
        return "energy_criterion";
    case Termination::ReachedSmax:
        return "reached_smax";
    }
    return "unknown";
}

FlowState make_state(MapField phi, const StepControl& ctrl) {
    ctrl.validate();
    const double ds = ctrl.ds(phi.grid());
    return FlowState{0.0, std::move(phi), ds, 0};
}

double sup_gradient(const MapField& phi) {
    std::vector<double> e(phi.grid().nodes());
    detail::one_sided_density(phi, e);
    const double m = e.empty() ? 0.0 : *std::max_element(e.begin(), e.end());
    return std::sqrt(m);
}

FlowHistory evolve(FlowState& state, const StepControl& ctrl, const SampleSchedule& schedule,
                   FlowObserver* observer) {
    ctrl.validate();
    if (!(state.ds > 0.0)) {
        raise(ErrorCode::InvalidArgument, "step size must be positive");
    }
    FlowHistory hist;
    hist.initial_energy = energy(state.phi);
    hist.initial_sup_grad = sup_gradient(state.phi);
    hist.max_band_deviation = boundary_band_deviation(state.phi);
    const double stop_level = ctrl.stop_energy_fraction * hist.initial_energy;
    const double ceiling = ctrl.blowup_factor * hist.initial_sup_grad;

    double current_energy = hist.initial_energy;
    if (observer != nullptr) {
        observer->on_sample(state, current_energy);
    }
    auto finish = [&](Termination reason) {
        hist.reason = reason;
        hist.s_final = state.s;
        hist.steps = state.steps;
        hist.final_energy = current_energy;
        return hist;
    };
    if (current_energy <= stop_level) {
        return finish(Termination::EnergyCriterion);
    }

    Stepper stepper(state.phi);
    double next_sample = schedule.next_after(state.s, state.ds);
    // Stop once the next full step would overshoot s_max.
    const double s_limit = ctrl.s_max * (1.0 + 1e-12);
    while (state.s + state.ds <= s_limit) {
        if (observer != nullptr) {
            const FlowState before = state;
            stepper.advance(state);
            observer->on_step(before, state);
        } else {
            stepper.advance(state);
        }
        const bool last = state.s + state.ds > s_limit;
        if (state.s >= next_sample || last) {
            current_energy = energy(state.phi);
            const double grad = sup_gradient(state.phi);
            hist.max_band_deviation = std::max(hist.max_band_deviation, boundary_band_deviation(state.phi));
            if (grad > ceiling) {
                raise(ErrorCode::BlowupSuspected, "sup |d_x phi| exceeded the blowup ceiling at s = " +
                                                       std::to_string(state.s));
            }
            if (observer != nullptr) {
                observer->on_sample(state, current_energy);
            }
            if (current_energy <= stop_level) {
                return finish(Termination::EnergyCriterion);
            }
            next_sample = schedule.next_after(state.s, state.ds);
        }
    }
    return finish(Termination::ReachedSmax);
}

} // namespace hmflow
