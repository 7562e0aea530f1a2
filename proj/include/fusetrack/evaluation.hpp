// SPDX-License-Identifier: Apache-2.0
//
// fusetrack: Wi-Fi CSI and pressure-insole fusion for single-target tracking
// Copyright (C) 2026 The fusetrack authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef FUSETRACK_EVALUATION_HPP
#define FUSETRACK_EVALUATION_HPP

#include "fusetrack/formats.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fusetrack
{

struct Summary
{
    std::size_t n = 0;
    double mean = 0.0;
    std::optional<double> std; // unbiased (n - 1); undefined for n < 2
    double min = 0.0;
    double max = 0.0;
};

// Throws Errc::InsufficientData for an empty sample.
Summary summarize(std::span<const double> values);

struct ErrorReport
{
    double initial_error = 0.0;
    std::vector<double> step_errors; // states after the initial one
    Summary summary;                 // over all states

    double endpoint_error() const { return step_errors.empty() ? initial_error : step_errors.back(); }
    double mean_step_error() const;  // mean over step_errors, initial_error when there are none
};

// Distance of every estimated state to the interpolated ground truth. Throws
// Errc::NoOverlap when a state lies outside the ground-truth time support.
ErrorReport evaluate(const io::TrajectoryFile &est, const io::GroundTruthTrace &gt);

std::string report_to_string(const ErrorReport &r);
ErrorReport report_from_string(const std::string &text);
void write_report(const std::filesystem::path &path, const ErrorReport &r);

} // namespace fusetrack

#endif
