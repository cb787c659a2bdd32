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

#include "config.hpp"
#include "report.hpp"

#include <string>
#include <vector>

namespace hmflow::cli {

/// Experiment names in a fixed order.
std::vector<std::string> list_experiments();

/// Runs the configured experiment, writes its files into config.out and
/// fills `report`. Bad data or grid settings raise ConfigError; solver
/// failures propagate with `report` holding whatever was recorded so far.
void run_experiment(const RunConfig& config, Report& report);

} // namespace hmflow::cli
