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

// Acceptance suite A1-A11.  Usage: hmflow_acceptance [A1 ... A11]; no
// arguments runs everything.  One PASS/FAIL line per criterion; the exit
// code is nonzero if any selected criterion fails.  Tolerances are pinned
// below and must not be loosened to make a run pass.

#include "hmflow/data.hpp"
#include "hmflow/energyspace.hpp"
#include "hmflow/errors.hpp"
#include "hmflow/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace hmflow;

// Pinned tolerances.
constexpr double kMonotoneTol = 1e-10;        // A1, relative to E0
constexpr double kIdentityTol = 1e-3;         // A2
constexpr double kRefineFactor = 3.0;         // A3, A7
constexpr double kGaugeAbsTol = 1e-2;         // A3
constexpr double kRoundoffFloor = 1e-12;      // A3: residual already at roundoff at both resolutions
constexpr double kNormalizeTol = 1e-6;        // A4
constexpr double kUniquenessTol = 1e-8;       // A4
constexpr double kEquivarianceTol = 1e-10;    // A4
constexpr double kSupE1Slope = -1.0;          // A5
constexpr double kSupE1SlopeBand = 0.3;       // A5
constexpr double kSE2Growth = 10.0;           // A5
constexpr double kConnectionSlope = -0.3;     // A5
constexpr double kDiamagneticFrac = 1e-2;     // A6
constexpr double kDilationTol = 1e-3;         // A8
constexpr double kStereoEnergyTol = 5e-3;     // A9
constexpr double kStereoTensionTol = 1e-2;    // A9
constexpr double kStrichartzStability = 0.05; // A10
constexpr double kConcentrationC = 8.0;       // A11
constexpr double kConcentrationDrift = 0.2;   // A11

// Default desk-scale setting.
constexpr int kN = 128;
constexpr double kL = 16.0;

struct Verdict {
    bool pass = false;
    std::string title;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string sci(double v) {
    return fmt("%.3e", v);
}

MapField scalar_bump(const Grid2& g) {
    return make_bump_data(sphere_target(2), g, 0.5, 1.5);
}

// Two-dimensional image, so that the connection and curvature do not vanish.
MapField vector_bump(const Grid2& g) {
    return make_vector_bump_data(sphere_target(2), g, 1.0, 1.5);
}

StepControl control(double cfl, double s_max, double stop = 1e-4) {
    StepControl c;
    c.cfl = cfl;
    c.s_max = s_max;
    c.stop_energy_fraction = stop;
    return c;
}

Verdict a1() {
    const Grid2 g(kN, kL);
    EnergyOptions o;
    o.k_max = 1;
    const EnergyRun run = run_energy(scalar_bump(g), o);
    const double rise = monotonicity_violation(run.series);
    const double tol = kMonotoneTol * run.flow.initial_energy;
    return {rise <= tol, "energy monotonicity",
            "max rise of E " + sci(rise) + " <= " + sci(tol) + " over " + std::to_string(run.series.samples.size()) +
                " samples"};
}

Verdict a2() {
    const Grid2 g(kN, kL);
    CaloricOptions o;
    o.k_max = 1;
    o.track_gauge = false;
    const CaloricRun run = run_caloric(scalar_bump(g), o);
    const IdentityCheck ic = energy_identity_check(run.primary.resolution, run.flow.initial_energy,
                                                   run.flow.final_energy, o.ctrl.stop_energy_fraction);
    bool pass = ic.gap <= kIdentityTol;
    std::string detail = "finite-horizon gap " + sci(ic.gap) + " <= " + sci(kIdentityTol);
    if (ic.lemma_applies) {
        pass = pass && ic.lemma_gap <= kIdentityTol;
        detail += "; l_norm gap " + sci(ic.lemma_gap) + " <= " + sci(kIdentityTol);
    } else {
        detail += "; run stopped at s_max, l_norm identity not applicable";
    }
    detail += " (" + std::string(to_string(run.flow.reason)) + " at s = " + fmt("%.3f", run.flow.s_final) + ")";
    return {pass, "energy identity", detail};
}

GaugeResiduals probe_residuals(int n, double cfl, double s) {
    const Grid2 g(n, kL);
    CaloricOptions o;
    o.k_max = 1;
    o.track_gauge = false;
    o.normalize = false;
    o.ctrl = control(cfl, s + 4.0 * cfl * g.dx() * g.dx());
    o.schedule.linear_end = 0.0;
    o.schedule.per_decade = 1;
    o.probe_times = {s};
    const CaloricRun run = run_caloric(vector_bump(g), o);
    if (run.probes.empty()) {
        raise(ErrorCode::InsufficientHistory, "probe time not reached");
    }
    return run.probes.front();
}

Verdict a3() {
    constexpr double kProbe = 0.5;
    const GaugeResiduals coarse = probe_residuals(kN, 0.1, kProbe);
    const GaugeResiduals fine = probe_residuals(2 * kN, 0.2, kProbe);
    const std::vector<std::pair<std::string, double GaugeResiduals::*>> items = {
        {"A_s", &GaugeResiduals::sup_a_s},       {"torsion", &GaugeResiduals::torsion},
        {"frame_heat", &GaugeResiduals::frame_heat}, {"eom1", &GaugeResiduals::eom1},
        {"eom2", &GaugeResiduals::eom2},         {"eom3_x", &GaugeResiduals::eom3_x},
        {"eom3_s", &GaugeResiduals::eom3_s},     {"F", &GaugeResiduals::f_mismatch}};
    bool pass = true;
    std::ostringstream d;
    for (const auto& [name, field] : items) {
        const double c = coarse.*field;
        const double f = fine.*field;
        const bool at_floor = c <= kRoundoffFloor && f <= kRoundoffFloor;
        const double ratio = f > 0.0 ? c / f : std::numeric_limits<double>::infinity();
        const bool ok = c <= kGaugeAbsTol && (at_floor || ratio >= kRefineFactor);
        pass = pass && ok;
        d << name << " " << sci(c) << "->" << sci(f);
        if (at_floor) {
            d << " (roundoff)";
        } else {
            d << " x" << fmt("%.2f", ratio);
        }
        d << (ok ? "" : " [fail]") << "; ";
    }
    d << "abs <= " << sci(kGaugeAbsTol) << ", factor >= " << kRefineFactor;
    return {pass, "gauge identity suite", d.str()};
}

double max_sample_difference(const std::vector<Field>& a, const std::vector<Field>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, max_abs_difference(a[i], b[i]));
    }
    return worst;
}

Verdict a4() {
    const Grid2 g(kN, kL);
    CaloricOptions o;
    o.k_max = 1;
    FrameChoice alt;
    const double alpha = 0.3;
    Vec a(3);
    Vec b(3);
    a << std::cos(alpha), 0.0, std::sin(alpha);
    b << 0.0, 1.0, 0.0;
    alt.axes = {a, b};
    o.alternate = alt;
    const CaloricRun run = run_caloric(vector_bump(g), o);
    if (!run.primary.normalized || !run.alternate || !run.alternate->normalized) {
        return {false, "caloric normalization", "run did not reach the energy criterion"};
    }
    const GaugeSlice& last = run.primary.normalized->slices.back();
    const NormalizationError ne = normalization_error(last.frame, last.phi, run.reference);

    const ResolutionData& r1 = run.primary.resolution;
    const ResolutionData& r2 = run.alternate->resolution;
    double uniq = max_sample_difference(r1.psi_s, r2.psi_s);
    for (int j = 0; j < 2; ++j) {
        uniq = std::max(uniq, max_abs_difference(r1.psi_x0[j], r2.psi_x0[j]));
    }

    const double theta = 0.7;
    Mat q(2, 2);
    q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const GaugeHistory rotated = caloric_normalize(run.primary.history, rotate_reference(run.reference, q),
                                                   run.flow.initial_energy, run.flow.final_energy,
                                                   o.ctrl.stop_energy_fraction);
    Field qt(g, 4);
    for (std::size_t n = 0; n < g.nodes(); ++n) {
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                qt.at(r * 2 + c, n) = q(r, c);
            }
        }
    }
    double equiv = 0.0;
    for (std::size_t i = 0; i < rotated.samples.size(); ++i) {
        const GaugeFields& base = run.primary.normalized->samples[i];
        const GaugeFields& rot = rotated.samples[i];
        equiv = std::max(equiv, max_abs_difference(rot.psi_s, rotate_components(base.psi_s, qt)));
        for (int j = 0; j < 2; ++j) {
            equiv = std::max(equiv, max_abs_difference(rot.psi_x[j], rotate_components(base.psi_x[j], qt)));
        }
    }
    const bool pass = ne.to_projected <= kNormalizeTol && uniq <= kUniquenessTol && equiv <= kEquivarianceTol;
    return {pass, "caloric normalization",
            "|e(s_max) - e(inf)| " + sci(ne.to_projected) + " <= " + sci(kNormalizeTol) + " (unprojected " +
                sci(ne.to_reference) + "); uniqueness " + sci(uniq) + " <= " + sci(kUniquenessTol) +
                "; rotation " + sci(equiv) + " <= " + sci(kEquivarianceTol)};
}

Verdict a5() {
    const Grid2 g(kN, kL);
    EnergyOptions eo;
    eo.k_max = 2;
    eo.ctrl = control(0.1, 50.0, 1e-8);
    const EnergyRun erun = run_energy(scalar_bump(g), eo);
    const DecayReport rep = decay_report(erun.series, 1.0, 10.0);
    const double slope = rep.fit("sup_e1").slope;
    const bool slope_ok = std::abs(slope - kSupE1Slope) <= kSupE1SlopeBand;
    const bool e2_ok = rep.s_e2_growth <= kSE2Growth;

    CaloricOptions co;
    co.k_max = 1;
    co.ctrl = control(0.1, 50.0, 1e-8);
    const CaloricRun crun = run_caloric(vector_bump(g), co);
    double a_slope = std::numeric_limits<double>::quiet_NaN();
    if (crun.primary.normalized) {
        a_slope = connection_decay_report(*crun.primary.normalized, 1.0, 10.0).slope_sup_a;
    }
    const bool a_ok = a_slope <= kConnectionSlope;
    return {slope_ok && e2_ok && a_ok, "decay rates",
            "sup e1 slope " + fmt("%.3f", slope) + " in " + fmt("%.1f", kSupE1Slope) + " +- " +
                fmt("%.1f", kSupE1SlopeBand) + (slope_ok ? "" : " [fail]") + "; max s E2 / (s E2)(1) " +
                fmt("%.2f", rep.s_e2_growth) + " <= " + fmt("%.0f", kSE2Growth) + (e2_ok ? "" : " [fail]") +
                "; |A_x|_inf slope " + fmt("%.3f", a_slope) + " <= " + fmt("%.1f", kConnectionSlope) +
                (a_ok ? "" : " [fail]")};
}

MapField snapshot_at(const MapField& phi0, double cfl, double s) {
    EnergyOptions o;
    o.k_max = 1;
    o.ctrl = control(cfl, s, 0.0);
    o.schedule.linear_end = 0.0;
    o.schedule.per_decade = 1;
    o.snapshot_times = {s};
    const EnergyRun run = run_energy(phi0, o);
    return run.snapshots.back().phi;
}

Verdict a6() {
    double viol[2];
    double tol[2];
    for (int r = 0; r < 2; ++r) {
        const Grid2 g(kN << r, kL);
        const MapField phi = snapshot_at(scalar_bump(g), 0.1, 1.0);
        const DensityStack st = density_stack(phi, 2, 1.0);
        double sup2 = 0.0;
        for (double v : st.e[1].data()) {
            sup2 = std::max(sup2, v);
        }
        viol[r] = diamagnetic_violation(st, 1);
        tol[r] = kDiamagneticFrac * std::sqrt(sup2);
    }
    const bool pass = viol[0] <= tol[0] && viol[1] < viol[0];
    return {pass, "diamagnetic inequality",
            "violation " + sci(viol[0]) + " <= " + sci(tol[0]) + " at dx = " + fmt("%.4f", kL / kN) +
                ", refined " + sci(viol[1])};
}

double bochner_probe(int n, double cfl, double s) {
    const Grid2 g(n, kL);
    EnergyOptions o;
    o.k_max = 1;
    o.ctrl = control(cfl, s + 4.0 * cfl * g.dx() * g.dx(), 0.0);
    o.schedule.linear_end = 0.0;
    o.schedule.per_decade = 1;
    o.bochner_times = {s};
    const EnergyRun run = run_energy(scalar_bump(g), o);
    if (run.bochner_probe_sup.empty()) {
        raise(ErrorCode::InsufficientHistory, "probe time not reached");
    }
    return run.bochner_probe_sup.front();
}

Verdict a7() {
    const double c = bochner_probe(kN, 0.1, 0.5);
    const double f = bochner_probe(2 * kN, 0.2, 0.5);
    const double ratio = c / f;
    return {ratio >= kRefineFactor, "Bochner k = 1 residual",
            "sup residual " + sci(c) + " -> " + sci(f) + ", factor " + fmt("%.2f", ratio) + " >= " +
                fmt("%.1f", kRefineFactor)};
}

Verdict a8() {
    // Translation by a lattice vector commutes with the flow exactly.
    const Grid2 g(kN, kL);
    const MapField phi0 = make_bump_data(sphere_target(2), g, 0.5, 1.5, {0.5, -0.25});
    const MapField moved0 = translate_data(phi0, {1.0, -0.5});
    const MapField a = snapshot_at(phi0, 0.1, 0.5);
    const MapField b = snapshot_at(moved0, 0.1, 0.5);
    const double trans = max_abs_difference(shift(a.values(), 8, -4), b.values());

    // Dilation: E(phi_lambda(lambda^2 s)) = E(phi(s)), lambda = 2, on a box
    // large enough that the periodic images stay negligible.
    const Grid2 big(256, 32.0);
    const MapField narrow = make_bump_data(sphere_target(2), big, 0.5, 2.0);
    const MapField wide = rescale_data(narrow, 2.0);
    EnergyOptions o;
    o.k_max = 1;
    o.schedule.linear_end = 0.0;
    o.schedule.per_decade = 1;
    o.ctrl = control(0.1, 1.0, 0.0);
    o.snapshot_times = {0.25, 0.5, 1.0};
    const EnergyRun rn = run_energy(narrow, o);
    o.ctrl = control(0.1, 4.0, 0.0);
    o.snapshot_times = {1.0, 2.0, 4.0};
    const EnergyRun rw = run_energy(wide, o);
    double dil = 0.0;
    for (std::size_t i = 0; i < rn.snapshots.size(); ++i) {
        const double en = energy(rn.snapshots[i].phi);
        const double ew = energy(rw.snapshots[i].phi);
        dil = std::max(dil, std::abs(ew - en) / en);
    }
    const bool pass = trans == 0.0 && dil <= kDilationTol;
    return {pass, "symmetries",
            "lattice translation max difference " + sci(trans) + " (exact); dilation lambda = 2 relative " +
                sci(dil) + " <= " + sci(kDilationTol)};
}

Verdict a9() {
    const Grid2 g(kN, kL);
    const double lambda = 0.5;
    const MapField ideal = ideal_stereographic_map(g, lambda);
    // Grid quadrature inside R plus the closed-form tail 4 pi / (1 + lambda^2 R^2).
    const double R = 3.0 * kL / 8.0;
    const double inner = local_energy(ideal, {0.0, 0.0}, R);
    const double tail = 4.0 * std::numbers::pi / (1.0 + lambda * lambda * R * R);
    const double total = inner + tail;
    const double rel = std::abs(total / (4.0 * std::numbers::pi) - 1.0);

    const Field tau = tension(ideal);
    double sup_tau = 0.0;
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            if (std::max(std::abs(g.coord(i)), std::abs(g.coord(j))) >= kL / 4.0) {
                continue;
            }
            double v = 0.0;
            for (int c = 0; c < 3; ++c) {
                v += tau.at(c, i, j) * tau.at(c, i, j);
            }
            sup_tau = std::max(sup_tau, std::sqrt(v));
        }
    }
    const bool pass = rel <= kStereoEnergyTol && sup_tau <= kStereoTensionTol;
    return {pass, "stereographic energy",
            "energy " + fmt("%.6f", total) + " vs 4pi, relative " + sci(rel) + " <= " + sci(kStereoEnergyTol) +
                "; interior tension " + sci(sup_tau) + " <= " + sci(kStereoTensionTol)};
}

Verdict a10() {
    const Grid2 g(64, kL);
    double worst = 0.0;
    bool finite = true;
    for (unsigned seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        Field u(g, 1);
        double mean = 0.0;
        for (double& v : u.data()) {
            v = normal(rng);
            mean += v;
        }
        mean /= static_cast<double>(g.nodes());
        for (double& v : u.data()) {
            v -= mean;
        }
        const double coarse = strichartz_ratio(u, std::numeric_limits<double>::infinity(), {64, 1e-12});
        const double fine = strichartz_ratio(u, std::numeric_limits<double>::infinity(), {128, 1e-12});
        finite = finite && std::isfinite(coarse) && std::isfinite(fine);
        worst = std::max(worst, std::abs(fine / coarse - 1.0));
    }
    const bool pass = finite && worst <= kStrichartzStability;
    return {pass, "Strichartz ratio",
            std::string(finite ? "finite" : "non-finite") + " on 100 seeded fields; max change under s-grid doubling " +
                sci(worst) + " <= " + sci(kStrichartzStability)};
}

double required_constant(int n) {
    const Grid2 g(n, kL);
    const MapField phi0 = scalar_bump(g);
    const double e0 = energy(phi0);
    EnergyOptions o;
    o.k_max = 1;
    o.ctrl = control(0.1, 1.0, 0.0);
    o.snapshot_times = {0.25, 0.5, 1.0};
    const EnergyRun run = run_energy(phi0, o);
    const std::array<std::array<double, 2>, 3> centers = {{{0.0, 0.0}, {2.0, 0.0}, {3.0, 2.0}}};
    const std::array<double, 3> radii = {0.5, 1.0, 1.5};
    double need = -std::numeric_limits<double>::infinity();
    for (const MapSnapshot& snap : run.snapshots) {
        for (const auto& x0 : centers) {
            for (double R : radii) {
                const ConcentrationTerms t = concentration_check(phi0, snap.phi, e0, x0, R, snap.s);
                need = std::max(need, (t.lhs - t.local_initial) / t.scaled_time);
            }
        }
    }
    return need;
}

Verdict a11() {
    const double c = required_constant(kN);
    const double f = required_constant(2 * kN);
    const double drift = std::abs(f / c - 1.0);
    const bool pass = c <= kConcentrationC && f <= kConcentrationC && drift <= kConcentrationDrift;
    return {pass, "energy concentration",
            "smallest valid C " + fmt("%.4f", c) + " (refined " + fmt("%.4f", f) + ") <= " +
                fmt("%.0f", kConcentrationC) + "; drift " + sci(drift) + " <= " + sci(kConcentrationDrift)};
}

} // namespace

int main(int argc, char** argv) {
    const std::map<std::string, std::function<Verdict()>> suite = {
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4},  {"A5", a5},  {"A6", a6},
        {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}, {"A11", a11}};
    std::vector<std::string> order = {"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11"};
    std::vector<std::string> selected;
    for (int i = 1; i < argc; ++i) {
        if (!suite.count(argv[i])) {
            std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
            return 2;
        }
        selected.emplace_back(argv[i]);
    }
    if (selected.empty()) {
        selected = order;
    }
    int failures = 0;
    for (const std::string& id : selected) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = suite.at(id)();
        } catch (const std::exception& e) {
            v = {false, "aborted", e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%-4s %s %s: %s [%.1fs]\n", id.c_str(), v.pass ? "PASS" : "FAIL", v.title.c_str(),
                    v.detail.c_str(), secs);
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
