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

#include "hmflow/data.hpp"
#include "hmflow/flow.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hmflow::cli {

/// "bump:a=0.5,w=1.5", "vbump:a=1,w=1.5", "stereo:lambda=2" or "constant".
struct DataSpec {
    std::string kind;
    std::map<std::string, double> params;
};

DataSpec parse_data_spec(std::string_view text);
MapField make_data(const DataSpec& spec, const TargetManifold& target, const Grid2& grid);

struct RunConfig {
    std::string target = "sphere:2";
    std::string data; // empty: the experiment's default
    int n = 128;
    double box = 16.0;
    StepControl ctrl;
    SampleSchedule schedule;
    std::string experiment = "monotonicity";
    std::string out = ".";
    std::uint64_t seed = 0;
    int k_max = 3;
    /// Keys given explicitly, so experiment defaults do not override them.
    std::set<std::string> explicit_keys;

    bool given(const std::string& key) const {
        return explicit_keys.count(key) > 0;
    }
};

/// `key = value` lines; blank lines and lines starting with '#' are skipped.
std::vector<std::pair<std::string, std::string>> read_settings(std::istream& in);

/// Keys: target, data, n, box, cfl, smax, stop, experiment, out, seed,
/// k_max, linear_end, per_decade. Dashes and underscores are interchangeable.
/// Raises ConfigError on an unknown key or a malformed value.
void apply_setting(RunConfig& config, std::string key, const std::string& value);

/// Checks that every spec parses and the numeric settings are in range.
void validate(const RunConfig& config);

} // namespace hmflow::cli
