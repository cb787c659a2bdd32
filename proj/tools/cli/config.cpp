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

#include "config.hpp"

#include "experiments.hpp"
#include "hmflow/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace hmflow::cli {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, std::string_view text) {
    const std::string s = trim(text);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        raise(ErrorCode::ConfigError, "bad value '" + s + "' for " + key);
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(v)) {
            raise(ErrorCode::ConfigError, "non-finite value for " + key);
        }
    }
    return v;
}

double require(const DataSpec& spec, const std::string& key) {
    const auto it = spec.params.find(key);
    if (it == spec.params.end()) {
        raise(ErrorCode::ConfigError, "data '" + spec.kind + "' needs " + key + "=");
    }
    return it->second;
}

void allow_only(const DataSpec& spec, std::initializer_list<std::string_view> keys) {
    for (const auto& [k, v] : spec.params) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            raise(ErrorCode::ConfigError, "data '" + spec.kind + "' has no parameter " + k);
        }
    }
}

} // namespace

DataSpec parse_data_spec(std::string_view text) {
    DataSpec spec;
    const auto colon = text.find(':');
    spec.kind = trim(text.substr(0, colon));
    if (spec.kind.empty()) {
        raise(ErrorCode::ConfigError, "empty data spec");
    }
    if (colon == std::string_view::npos) {
        return spec;
    }
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            raise(ErrorCode::ConfigError, "data parameter '" + std::string(item) + "' is not key=value");
        }
        const std::string key = trim(item.substr(0, eq));
        if (spec.params.count(key)) {
            raise(ErrorCode::ConfigError, "data parameter " + key + " given twice");
        }
        spec.params[key] = parse_number<double>(key, item.substr(eq + 1));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return spec;
}

MapField make_data(const DataSpec& spec, const TargetManifold& target, const Grid2& grid) {
    if (spec.kind == "bump" || spec.kind == "vbump") {
        allow_only(spec, {"a", "w", "x", "y"});
        const std::array<double, 2> c = {spec.params.count("x") ? spec.params.at("x") : 0.0,
                                         spec.params.count("y") ? spec.params.at("y") : 0.0};
        if (spec.kind == "bump") {
            return make_bump_data(target, grid, require(spec, "a"), require(spec, "w"), c);
        }
        return make_vector_bump_data(target, grid, require(spec, "a"), require(spec, "w"), c);
    }
    if (spec.kind == "stereo") {
        allow_only(spec, {"lambda"});
        if (target.name() != "sphere:2") {
            raise(ErrorCode::ConfigError, "stereo data needs target sphere:2");
        }
        return make_stereographic_data(grid, require(spec, "lambda"));
    }
    if (spec.kind == "constant") {
        allow_only(spec, {});
        return MapField(grid, target);
    }
    raise(ErrorCode::ConfigError, "unknown data kind '" + spec.kind + "'");
}

std::vector<std::pair<std::string, std::string>> read_settings(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            raise(ErrorCode::ConfigError, "config line " + std::to_string(number) + " is not key = value");
        }
        out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return out;
}

void apply_setting(RunConfig& c, std::string key, const std::string& value) {
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "target") {
        c.target = value;
    } else if (key == "data") {
        c.data = value;
    } else if (key == "n") {
        c.n = parse_number<int>(key, value);
    } else if (key == "box") {
        c.box = parse_number<double>(key, value);
    } else if (key == "cfl") {
        c.ctrl.cfl = parse_number<double>(key, value);
    } else if (key == "smax") {
        c.ctrl.s_max = parse_number<double>(key, value);
    } else if (key == "stop") {
        c.ctrl.stop_energy_fraction = parse_number<double>(key, value);
    } else if (key == "experiment") {
        c.experiment = value;
    } else if (key == "out") {
        c.out = value;
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "k_max") {
        c.k_max = parse_number<int>(key, value);
    } else if (key == "linear_end") {
        c.schedule.linear_end = parse_number<double>(key, value);
    } else if (key == "per_decade") {
        c.schedule.per_decade = parse_number<int>(key, value);
    } else {
        raise(ErrorCode::ConfigError, "unknown setting '" + key + "'");
    }
    c.explicit_keys.insert(key);
}

void validate(const RunConfig& c) {
    const auto names = list_experiments();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
        raise(ErrorCode::ConfigError, "unknown experiment '" + c.experiment + "'");
    }
    parse_target(c.target);
    if (!c.data.empty()) {
        parse_data_spec(c.data);
    }
    if (c.n < 16 || c.n % 2 != 0) {
        raise(ErrorCode::ConfigError, "n must be even and at least 16");
    }
    if (!(c.box > 0.0)) {
        raise(ErrorCode::ConfigError, "box must be positive");
    }
    if (c.k_max < 1 || c.k_max > 4) {
        raise(ErrorCode::ConfigError, "k_max must be in 1..4");
    }
    if (c.schedule.per_decade <= 0 || c.schedule.linear_end < 0.0) {
        raise(ErrorCode::ConfigError, "sample schedule needs per_decade > 0 and linear_end >= 0");
    }
    try {
        c.ctrl.validate();
    } catch (const Error& e) {
        raise(ErrorCode::ConfigError, e.what());
    }
    if (c.out.empty()) {
        raise(ErrorCode::ConfigError, "empty output directory");
    }
}

} // namespace hmflow::cli
