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

#include "hmflow/pipeline.hpp"

#include "hmflow/errors.hpp"
#include "kernels.hpp"

#include <cmath>
#include <deque>

namespace hmflow {

namespace {

constexpr double kTimeSlack = 1e-12;

double dissipation_density_integral(const MapField& phi) {
    const Field t = tension(phi);
    const std::vector<double> cf = detail::metric_factors(phi);
    double sum = 0.0;
    for (std::size_t q = 0; q < phi.grid().nodes(); ++q) {
        double v = 0.0;
        for (int c = 0; c < t.components(); ++c) {
            v += t.at(c, q) * t.at(c, q);
        }
        sum += cf[q] * v;
    }
    const double dx = phi.grid().dx();
    return sum * dx * dx;
}

bool reached(double s, double t) {
    return s >= t - kTimeSlack * std::max(1.0, t);
}

class SnapshotTaker {
public:
    explicit SnapshotTaker(std::vector<double> times) : times_(std::move(times)) {}

    void offer(const FlowState& st, std::vector<MapSnapshot>& out) {
        while (next_ < times_.size() && reached(st.s, times_[next_])) {
            out.push_back(MapSnapshot{st.s, st.phi});
            ++next_;
        }
    }

private:
    std::vector<double> times_;
    std::size_t next_ = 0;
};

struct Track {
    FrameField frame;
    GaugeHistory history;
    ResolutionData resolution;
    double max_gram = 0.0;
};

class CaloricObserver : public FlowObserver {
public:
    CaloricObserver(const CaloricOptions& opts, CaloricRun& run, Track& primary, Track* alternate)
        : opts_(opts), run_(run), primary_(primary), alternate_(alternate), snaps_(opts.snapshot_times) {
        next_gauge_ = opts.gauge_start;
    }

    void on_step(const FlowState& before, const FlowState& after) override {
        transport_frame_in_place(primary_.frame, before.phi, after.phi);
        if (alternate_ != nullptr) {
            transport_frame_in_place(alternate_->frame, before.phi, after.phi);
        }
        const double diss = dissipation_density_integral(after.phi);
        run_.stepwise_dissipation += 0.5 * (after.s - before.s) * (last_diss_ + diss);
        last_diss_ = diss;

        if (probe_ < opts_.probe_times.size()) {
            ring_.push_back(GaugeSlice{after.s, after.phi, primary_.frame});
            if (ring_.size() > 3) {
                ring_.pop_front();
            }
            if (ring_.size() == 3 && reached(ring_[1].s, opts_.probe_times[probe_])) {
                const std::vector<GaugeSlice> three(ring_.begin(), ring_.end());
                run_.probes.push_back(eom_residuals(three, after.ds));
                while (probe_ < opts_.probe_times.size() && reached(ring_[1].s, opts_.probe_times[probe_])) {
                    ++probe_;
                }
                if (probe_ == opts_.probe_times.size()) {
                    ring_.clear();
                }
            }
        }
        if (opts_.track_gauge && reached(after.s, next_gauge_)) {
            record_gauge(after);
            while (reached(after.s, next_gauge_)) {
                ++gauge_index_;
                next_gauge_ = opts_.gauge_start * std::pow(10.0, static_cast<double>(gauge_index_) /
                                                                     opts_.gauge_per_decade);
            }
        }
        snaps_.offer(after, run_.snapshots);
    }

    void on_sample(const FlowState& st, double /*energy*/) override {
        const DensityStack stack = density_stack(st.phi, opts_.k_max, st.s);
        run_.series.append(summarize(stack, st.phi));
        const Field tau = tension(st.phi);
        for (Track* t : tracks()) {
            t->resolution.s.push_back(st.s);
            t->resolution.psi_s.push_back(frame_components(t->frame, st.phi, tau));
            t->max_gram = std::max(t->max_gram, gram_defect(t->frame, st.phi));
        }
        if (st.steps == 0) {
            last_diss_ = dissipation_density_integral(st.phi);
            for (Track* t : tracks()) {
                t->resolution.psi_x0 = edge_derivative_fields(t->frame, st.phi);
            }
            if (opts_.track_gauge) {
                record_gauge(st);
            }
            if (!opts_.probe_times.empty()) {
                ring_.push_back(GaugeSlice{st.s, st.phi, primary_.frame});
            }
            snaps_.offer(st, run_.snapshots);
        }
    }

    void finish(const FlowState& st) {
        if (opts_.track_gauge &&
            (primary_.history.slices.empty() || primary_.history.slices.back().s < st.s)) {
            record_gauge(st);
        }
    }

private:
    std::vector<Track*> tracks() {
        std::vector<Track*> out{&primary_};
        if (alternate_ != nullptr) {
            out.push_back(alternate_);
        }
        return out;
    }

    void record_gauge(const FlowState& st) {
        for (Track* t : tracks()) {
            t->history.slices.push_back(GaugeSlice{st.s, st.phi, t->frame});
            t->history.samples.push_back(gauge_fields(t->frame, st.phi, st.s));
        }
    }

    const CaloricOptions& opts_;
    CaloricRun& run_;
    Track& primary_;
    Track* alternate_;
    SnapshotTaker snaps_;
    std::deque<GaugeSlice> ring_;
    std::size_t probe_ = 0;
    double next_gauge_ = 0.0;
    int gauge_index_ = 0;
    double last_diss_ = 0.0;
};

FrameTrack finalize(Track&& t, const CaloricRun& run, const CaloricOptions& opts) {
    FrameTrack out{std::move(t.frame), std::move(t.history), std::nullopt, std::move(t.resolution), t.max_gram};
    out.resolution.m = out.frame.m;
    const bool converged = run.flow.reason == Termination::EnergyCriterion;
    if (!opts.normalize || !converged || out.history.slices.empty()) {
        return out;
    }
    out.normalized = caloric_normalize(out.history, run.reference, run.flow.initial_energy, run.flow.final_energy,
                                       opts.ctrl.stop_energy_fraction);
    const Field& u = *out.normalized->u;
    for (Field& f : out.resolution.psi_s) {
        f = rotate_components(f, u);
    }
    for (Field& f : out.resolution.psi_x0) {
        f = rotate_components(f, u);
    }
    return out;
}

} // namespace

CaloricRun run_caloric(const MapField& phi0, const CaloricOptions& options) {
    options.ctrl.validate();
    if (options.gauge_per_decade <= 0 || !(options.gauge_start > 0.0)) {
        raise(ErrorCode::InvalidArgument, "gauge sampling needs a positive start and density");
    }
    CaloricRun run{FlowHistory{}, EnergySeries{}, phi0, phi0, 0.0, 0.0, FrameTrack{}, std::nullopt, {}, {},
                   options.reference ? *options.reference : default_reference_frame(phi0.target())};
    Track primary{initial_frame(phi0, options.choice), {}, {}, 0.0};
    std::optional<Track> alternate;
    if (options.alternate) {
        alternate = Track{initial_frame(phi0, *options.alternate), {}, {}, 0.0};
    }
    FlowState state = make_state(phi0, options.ctrl);
    run.ds = state.ds;
    CaloricObserver obs(options, run, primary, alternate ? &*alternate : nullptr);
    run.flow = evolve(state, options.ctrl, options.schedule, &obs);
    obs.finish(state);
    run.series.initial_energy = run.flow.initial_energy;
    run.phi_final = state.phi;
    run.primary = finalize(std::move(primary), run, options);
    if (alternate) {
        run.alternate = finalize(std::move(*alternate), run, options);
    }
    return run;
}

namespace {

class EnergyObserver : public FlowObserver {
public:
    EnergyObserver(const EnergyOptions& opts, EnergyRun& run)
        : opts_(opts), run_(run), snaps_(opts.snapshot_times) {}

    void on_step(const FlowState& /*before*/, const FlowState& after) override {
        if (probe_ < opts_.bochner_times.size()) {
            ring_.push_back(after.phi);
            times_.push_back(after.s);
            if (ring_.size() > 3) {
                ring_.pop_front();
                times_.pop_front();
            }
            if (ring_.size() == 3 && reached(times_[1], opts_.bochner_times[probe_])) {
                const std::vector<MapField> three(ring_.begin(), ring_.end());
                run_.bochner_probe_s.push_back(times_[1]);
                run_.bochner_probe_sup.push_back(sup_norm(bochner_residual_k1(three, after.ds)));
                while (probe_ < opts_.bochner_times.size() && reached(times_[1], opts_.bochner_times[probe_])) {
                    ++probe_;
                }
            }
        }
        snaps_.offer(after, run_.snapshots);
    }

    void on_sample(const FlowState& st, double /*energy*/) override {
        const DensityStack stack = density_stack(st.phi, opts_.k_max, st.s);
        run_.series.append(summarize(stack, st.phi));
        if (st.steps == 0) {
            if (!opts_.bochner_times.empty()) {
                ring_.push_back(st.phi);
                times_.push_back(st.s);
            }
            snaps_.offer(st, run_.snapshots);
        }
    }

private:
    const EnergyOptions& opts_;
    EnergyRun& run_;
    SnapshotTaker snaps_;
    std::deque<MapField> ring_;
    std::deque<double> times_;
    std::size_t probe_ = 0;
};

} // namespace

EnergyRun run_energy(const MapField& phi0, const EnergyOptions& options) {
    EnergyRun run{FlowHistory{}, EnergySeries{}, phi0, {}, {}, {}};
    FlowState state = make_state(phi0, options.ctrl);
    EnergyObserver obs(options, run);
    run.flow = evolve(state, options.ctrl, options.schedule, &obs);
    run.series.initial_energy = run.flow.initial_energy;
    run.phi_final = state.phi;
    return run;
}

} // namespace hmflow
