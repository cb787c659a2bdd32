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

#include "report.hpp"

#include "hmflow/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

namespace hmflow::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorCode::ConfigError, "cannot write " + path.string());
    }
    return out;
}

std::string_view comparison_name(Comparison c) {
    switch (c) {
    case Comparison::AtMost:
        return "<=";
    case Comparison::AtLeast:
        return ">=";
    case Comparison::Within:
        return "within";
    case Comparison::Report:
        return "report";
    }
    return "report";
}

nlohmann::ordered_json number(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return nullptr;
}

} // namespace

bool Check::passed() const {
    if (skipped || comparison == Comparison::Report) {
        return true;
    }
    if (!std::isfinite(value)) {
        return false;
    }
    switch (comparison) {
    case Comparison::AtMost:
        return value <= tolerance;
    case Comparison::AtLeast:
        return value >= tolerance;
    case Comparison::Within:
        return std::abs(value - target) <= tolerance;
    case Comparison::Report:
        break;
    }
    return true;
}

std::string Check::status() const {
    if (skipped) {
        return "skipped";
    }
    if (comparison == Comparison::Report) {
        return "info";
    }
    return passed() ? "pass" : "fail";
}

Check& Report::add(Check c) {
    for (const Check& existing : checks) {
        if (existing.name == c.name) {
            raise(ErrorCode::InvalidArgument, "check " + c.name + " reported twice");
        }
    }
    checks.push_back(std::move(c));
    return checks.back();
}

bool Report::passed() const {
    for (const Check& c : checks) {
        if (c.gating && !c.passed()) {
            return false;
        }
    }
    return true;
}

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_series_csv(const std::filesystem::path& path, const EnergySeries& series) {
    std::ofstream out = open(path);
    out << "s,E1,E2,sup_e1,sup_grad,e_norm_partial\n";
    const std::vector<double> partial = e_norm_partial(series);
    for (std::size_t i = 0; i < series.samples.size(); ++i) {
        const EnergySample& x = series.samples[i];
        out << format_number(x.s) << ',' << format_number(x.E.at(0)) << ','
            << format_number(x.E.size() > 1 ? x.E[1] : kNaN) << ',' << format_number(x.sup_e.at(0))
            << ',' << format_number(x.sup_grad) << ',' << format_number(partial[i]) << '\n';
    }
}

void write_gauge_csv(const std::filesystem::path& path, const GaugeHistory& history,
                     const std::vector<GaugeResiduals>& probes) {
    std::ofstream out = open(path);
    out << "s,sup_A_s,sup_A_x,l2_A_x,torsion,f_mismatch,frame_heat,eom1,eom2,eom3_x,eom3_s,isometry,skew\n";
    std::size_t p = 0;
    for (const GaugeSlice& slice : history.slices) {
        const GaugeResiduals r = slice_residuals(slice);
        while (p < probes.size() && probes[p].s < slice.s) {
            ++p;
        }
        const GaugeResiduals* probe = p < probes.size() && probes[p].s == slice.s ? &probes[p] : nullptr;
        auto from_probe = [&](double GaugeResiduals::*field) { return probe ? probe->*field : kNaN; };
        out << format_number(r.s) << ',' << format_number(from_probe(&GaugeResiduals::sup_a_s)) << ','
            << format_number(r.sup_a_x) << ',' << format_number(r.l2_a_x) << ',' << format_number(r.torsion) << ','
            << format_number(r.f_mismatch) << ',' << format_number(r.frame_heat) << ','
            << format_number(from_probe(&GaugeResiduals::eom1)) << ','
            << format_number(from_probe(&GaugeResiduals::eom2)) << ','
            << format_number(from_probe(&GaugeResiduals::eom3_x)) << ','
            << format_number(from_probe(&GaugeResiduals::eom3_s)) << ',' << format_number(r.isometry) << ','
            << format_number(r.skew) << '\n';
    }
}

void write_energyspace_json(const std::filesystem::path& path, const EnergySpaceSummary& s) {
    nlohmann::ordered_json j;
    j["E0"] = number(s.e0);
    j["E_smax"] = number(s.e_smax);
    j["s_final"] = number(s.s_final);
    j["dissipation_integral"] = number(s.identity.dissipation);
    j["l_norm"] = number(s.identity.l_norm);
    j["identity_gap"] = number(s.identity.gap);
    j["lemma_applies"] = s.identity.lemma_applies;
    j["lemma_gap"] = s.identity.lemma_applies ? number(s.identity.lemma_gap) : nlohmann::ordered_json(nullptr);
    j["normalized"] = s.normalized;
    std::ofstream out = open(path);
    out << j.dump(2) << '\n';
}

void write_summary_json(const std::filesystem::path& path, const RunConfig& config, const Report& report,
                        const std::string& status, int exit_code, const std::string& error_code,
                        const std::string& error_message) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["experiment"] = config.experiment;
    j["status"] = status;
    j["exit_code"] = exit_code;
    j["config"] = {{"target", config.target},
                   {"data", report.data.empty() ? config.data : report.data},
                   {"n", config.n},
                   {"box", config.box},
                   {"cfl", config.ctrl.cfl},
                   {"smax", config.ctrl.s_max},
                   {"stop", config.ctrl.stop_energy_fraction},
                   {"seed", config.seed},
                   {"k_max", config.k_max}};
    if (report.control) {
        j["effective_control"] = {{"cfl", report.control->cfl},
                                  {"smax", report.control->s_max},
                                  {"stop", report.control->stop_energy_fraction}};
    } else {
        j["effective_control"] = nullptr;
    }
    if (report.termination) {
        j["termination"] = {{"reason", report.termination->reason},
                            {"s_final", report.termination->s_final},
                            {"steps", report.termination->steps}};
    } else {
        j["termination"] = nullptr;
    }
    j["checks"] = nlohmann::ordered_json::array();
    for (const Check& c : report.checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["status"] = c.status();
        e["gating"] = c.gating;
        e["value"] = number(c.value);
        e["comparison"] = comparison_name(c.comparison);
        e["tolerance"] = c.comparison == Comparison::Report ? nlohmann::ordered_json(nullptr) : number(c.tolerance);
        e["target"] = c.comparison == Comparison::Within ? number(c.target) : nlohmann::ordered_json(nullptr);
        e["detail"] = c.detail;
        j["checks"].push_back(e);
    }
    j["fits"] = nlohmann::ordered_json::array();
    for (const DecayFit& f : report.fits) {
        j["fits"].push_back({{"quantity", f.quantity}, {"slope", number(f.slope)}, {"reference", number(f.reference)}});
    }
    j["files"] = report.files;
    j["runtime_seconds"] = report.runtime_seconds;
    if (error_code.empty()) {
        j["error"] = nullptr;
    } else {
        j["error"] = {{"code", error_code}, {"message", error_message}};
    }
    std::ofstream out = open(path);
    out << j.dump(2) << '\n';
}

} // namespace hmflow::cli
