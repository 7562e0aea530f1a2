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

#include "fusetrack/evaluation.hpp"
#include "fusetrack/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fusetrack
{

using nlohmann::json;

Summary summarize(std::span<const double> values)
{
    if (values.empty())
        throw Error(Errc::InsufficientData, "cannot summarize an empty sample");
    Summary s;
    s.n = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    if (s.n > 1)
    {
        double ss = 0.0;
        for (double v : values)
            ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

double ErrorReport::mean_step_error() const
{
    if (step_errors.empty())
        return initial_error;
    return std::accumulate(step_errors.begin(), step_errors.end(), 0.0) / static_cast<double>(step_errors.size());
}

ErrorReport evaluate(const io::TrajectoryFile &est, const io::GroundTruthTrace &gt)
{
    if (est.states.empty())
        throw Error(Errc::InsufficientData, "trajectory has no states");
    std::vector<double> errors;
    for (const auto &s : est.states)
    {
        const auto truth = gt.at(s.t);
        if (!truth)
            throw Error(Errc::NoOverlap, "state at t=" + std::to_string(s.t) + " lies outside the ground truth support");
        errors.push_back(distance({s.x, s.y}, *truth));
    }
    ErrorReport r;
    r.initial_error = errors.front();
    r.step_errors.assign(errors.begin() + 1, errors.end());
    r.summary = summarize(errors);
    return r;
}

std::string report_to_string(const ErrorReport &r)
{
    json j;
    j["initial_error"] = r.initial_error;
    j["step_errors"] = r.step_errors;
    j["summary"] = {{"n", r.summary.n},
                    {"mean", r.summary.mean},
                    {"std", r.summary.std ? json(*r.summary.std) : json(nullptr)},
                    {"min", r.summary.min},
                    {"max", r.summary.max}};
    return j.dump(2) + "\n";
}

ErrorReport report_from_string(const std::string &text)
{
    try
    {
        const json j = json::parse(text);
        ErrorReport r;
        r.initial_error = j.at("initial_error").get<double>();
        r.step_errors = j.at("step_errors").get<std::vector<double>>();
        const json &s = j.at("summary");
        r.summary.n = s.at("n").get<std::size_t>();
        r.summary.mean = s.at("mean").get<double>();
        if (!s.at("std").is_null())
            r.summary.std = s.at("std").get<double>();
        r.summary.min = s.at("min").get<double>();
        r.summary.max = s.at("max").get<double>();
        return r;
    }
    catch (const json::parse_error &e)
    {
        throw Error(Errc::ParseError, std::string("report: ") + e.what());
    }
    catch (const json::exception &e)
    {
        throw Error(Errc::SchemaError, std::string("report: ") + e.what());
    }
}

void write_report(const std::filesystem::path &path, const ErrorReport &r) { io::write_text(path, report_to_string(r)); }

} // namespace fusetrack
