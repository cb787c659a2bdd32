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

#include "hmflow/errors.hpp"

namespace hmflow {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument:
        return "InvalidArgument";
    case ErrorCode::ChartOverflow:
        return "ChartOverflow";
    case ErrorCode::RetractFailure:
        return "RetractFailure";
    case ErrorCode::NonTangentInput:
        return "NonTangentInput";
    case ErrorCode::ZeroInput:
        return "ZeroInput";
    case ErrorCode::StepDiverged:
        return "StepDiverged";
    case ErrorCode::BlowupSuspected:
        return "BlowupSuspected";
    case ErrorCode::BumpTooWide:
        return "BumpTooWide";
    case ErrorCode::ScaleOutOfRange:
        return "ScaleOutOfRange";
    case ErrorCode::IncommensurateScale:
        return "IncommensurateScale";
    case ErrorCode::InsufficientHistory:
        return "InsufficientHistory";
    case ErrorCode::InsufficientSpan:
        return "InsufficientSpan";
    case ErrorCode::NonTangentSection:
        return "NonTangentSection";
    case ErrorCode::DegenerateFrame:
        return "DegenerateFrame";
    case ErrorCode::NotConverged:
        return "NotConverged";
    case ErrorCode::ScheduleMismatch:
        return "ScheduleMismatch";
    case ErrorCode::ConfigError:
        return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void raise(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace hmflow
