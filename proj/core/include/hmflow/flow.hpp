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

#include "hmflow/geometry.hpp"
#include "hmflow/grid.hpp"

#include <cstddef>
#include <memory>
#include <string_view>

namespace hmflow {

/// A grid map into the target.  Embedded targets store ambient coordinates
/// per node, charted targets store chart coordinates.
class MapField {
public:
    /// The constant map at the target's base point.
    MapField(const Grid2& grid, TargetManifold target);
    MapField(const Grid2& grid, TargetManifold target, Field values, Vec base_point);

    const Grid2& grid() const {
        return values_.grid();
    }
    const TargetManifold& target() const {
        return target_;
    }
    const Field& values() const {
        return values_;
    }
    Field& values() {
        return values_;
    }
    const Vec& base_point() const {
        return base_;
    }
    int point_dim() const {
        return values_.components();
    }

    Vec point(std::size_t node) const;
    void set_point(std::size_t node, const Vec& p);

private:
    TargetManifold target_;
    Field values_;
    Vec base_;
};

/// Largest violation of the point constraint (sphere: | |phi| - 1 |; chart:
/// +infinity if any node leaves the chart domain, else 0).
double constraint_violation(const MapField& phi);
/// Largest distance (in stored coordinates) from the base point over the
/// outer band |x|_inf >= 3L/8.
double boundary_band_deviation(const MapField& phi);

struct StepControl {
    double cfl = 0.1;
    double s_max = 50.0;
    double stop_energy_fraction = 1e-4;
    double blowup_factor = 1e3;

    double ds(const Grid2& grid) const {
        return cfl * grid.dx() * grid.dx();
    }
    void validate() const;
};

struct FlowState {
    double s = 0.0;
    MapField phi;
    double ds = 0.0;
    std::size_t steps = 0;
};

/// Tension field of phi.  Derivative quadratic terms use the average of the
/// forward and backward one-sided differences, which makes the scheme the
/// exact gradient flow of `energy` on the sphere.
Field tension(const MapField& phi);

/// Classical RK4 stepper with per-node retraction; owns its scratch space.
class Stepper {
public:
    explicit Stepper(const MapField& like);
    ~Stepper();
    Stepper(Stepper&&) noexcept;
    Stepper& operator=(Stepper&&) noexcept;

    /// Advances state.phi by state.ds in place.
    void advance(FlowState& state);

private:
    struct Scratch;
    std::unique_ptr<Scratch> scratch_;
};

FlowState step(const FlowState& state, const StepControl& ctrl);

/// Samples every `linear_spacing` (every step when <= 0) up to `linear_end`,
/// then `per_decade` log-spaced samples per decade of s.
struct SampleSchedule {
    double linear_end = 0.1;
    double linear_spacing = 0.0;
    int per_decade = 100;

    double next_after(double s, double ds) const;
};

enum class Termination { EnergyCriterion, ReachedSmax };
std::string_view to_string(Termination t);

class FlowObserver {
public:
    virtual ~FlowObserver() = default;
    /// Called after every step with the states on either side of it.
    virtual void on_step(const FlowState& /*before*/, const FlowState& /*after*/) {}
    /// Called at s = 0, on every scheduled sample, and on the final state.
    virtual void on_sample(const FlowState& /*state*/, double /*energy*/) {}
};

struct FlowHistory {
    Termination reason = Termination::ReachedSmax;
    double s_final = 0.0;
    std::size_t steps = 0;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    double initial_sup_grad = 0.0;
    double max_band_deviation = 0.0;
};

/// Steps until s_max or until the energy falls to stop_energy_fraction of
/// its initial value.  Raises BlowupSuspected if sup |d_x phi| exceeds
/// blowup_factor times its initial value.
FlowHistory evolve(FlowState& state, const StepControl& ctrl, const SampleSchedule& schedule,
                   FlowObserver* observer = nullptr);

FlowState make_state(MapField phi, const StepControl& ctrl);

/// sup over nodes of the square root of the first energy density.
double sup_gradient(const MapField& phi);

} // namespace hmflow
