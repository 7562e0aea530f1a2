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

#include "fusetrack/insole_pipeline.hpp"
#include "fusetrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fusetrack::insole
{

double PressureFrame::total() const { return std::accumulate(p.begin(), p.end(), 0.0); }

double PressureFrame::row_sum(std::size_t row) const
{
    double acc = 0.0;
    for (std::size_t c = 0; c < kCols; ++c)
        acc += p[row * kCols + c];
    return acc;
}

SensorLayout SensorLayout::default_layout()
{
    static constexpr std::array<double, kRows> row_y = {0.95, 0.85, 0.74, 0.62, 0.50, 0.38, 0.26, 0.15, 0.05};
    SensorLayout layout;
    for (std::size_t r = 0; r < kRows; ++r)
        for (std::size_t c = 0; c < kCols; ++c)
            layout.y[r * kCols + c] = row_y[r];
    return layout;
}

void SensorLayout::validate() const
{
    for (std::size_t r = 0; r + 1 < kRows; ++r)
    {
        double row_min = y[r * kCols], next_max = y[(r + 1) * kCols];
        for (std::size_t c = 0; c < kCols; ++c)
        {
            row_min = std::min(row_min, y[r * kCols + c]);
            next_max = std::max(next_max, y[(r + 1) * kCols + c]);
        }
        if (!(row_min > next_max))
            throw Error(Errc::SchemaError, "layout row " + std::to_string(r + 1) + " is not toe-ward of row " +
                                               std::to_string(r + 2));
    }
}

std::size_t SensorLayout::toe_row() const
{
    std::size_t best = 0;
    double best_y = -1.0;
    for (std::size_t r = 0; r < kRows; ++r)
    {
        double mean = 0.0;
        for (std::size_t c = 0; c < kCols; ++c)
            mean += y[r * kCols + c];
        if (mean > best_y)
        {
            best_y = mean;
            best = r;
        }
    }
    return best;
}

double contact_threshold(const InsoleConfig &cfg)
{
    return cfg.contact_fraction * cfg.full_scale * static_cast<double>(kSensors);
}

std::optional<double> cop_y(const PressureFrame &frame, const SensorLayout &layout, double contact_eps)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < kSensors; ++i)
    {
        num += frame.p[i] * layout.y[i];
        den += frame.p[i];
    }
    if (!(den > contact_eps))
        return std::nullopt;
    return num / den;
}

namespace
{
// Time at which a linearly interpolated signal crosses `level` between two samples.
double crossing_time(double t0, double v0, double t1, double v1, double level)
{
    if (v1 == v0)
        return t1;
    return t0 + (level - v0) / (v1 - v0) * (t1 - t0);
}

double median_period(std::span<const PressureFrame> stream)
{
    if (stream.size() < 2)
        return 0.0;
    std::vector<double> dt;
    dt.reserve(stream.size() - 1);
    for (std::size_t i = 1; i < stream.size(); ++i)
        dt.push_back(stream[i].timestamp - stream[i - 1].timestamp);
    auto mid = dt.begin() + dt.size() / 2;
    std::nth_element(dt.begin(), mid, dt.end());
    return *mid;
}
} // namespace

double detect_sync_feature(std::span<const PressureFrame> stream, const SensorLayout &layout, const InsoleConfig &cfg)
{
    if (stream.size() < 2 || stream.back().timestamp - stream.front().timestamp <= cfg.hold_s)
        throw Error(Errc::FeatureNotFound, "stream shorter than the calibration hold");
    const double eps = contact_threshold(cfg);
    const double thr = cfg.forefoot_cop;
    std::vector<double> cop(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i)
        cop[i] = cop_y(stream[i], layout, eps).value_or(-1.0);

    std::size_t i = 0;
    while (i < stream.size())
    {
        if (cop[i] <= thr)
        {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < stream.size() && cop[j + 1] > thr)
            ++j;
        // A hold already under way when the recording starts has no observable rise.
        if (i > 0)
        {
            const double rise = crossing_time(stream[i - 1].timestamp, std::max(cop[i - 1], 0.0), stream[i].timestamp,
                                              cop[i], thr);
            if (stream[j].timestamp - rise >= cfg.hold_fraction * cfg.hold_s)
                return rise;
        }
        i = j + 1;
    }
    throw Error(Errc::FeatureNotFound, "no forefoot hold of " + std::to_string(cfg.hold_fraction * cfg.hold_s) + " s");
}

double align_streams(std::span<const PressureFrame> left, std::span<const PressureFrame> right,
                     const SensorLayout &layout, const InsoleConfig &cfg)
{
    return detect_sync_feature(left, layout, cfg) - detect_sync_feature(right, layout, cfg);
}

PressureStream shift_stream(std::span<const PressureFrame> stream, double offset)
{
    PressureStream out(stream.begin(), stream.end());
    for (auto &f : out)
        f.timestamp += offset;
    return out;
}

PressureStream resample_onto(std::span<const PressureFrame> source, std::span<const PressureFrame> grid)
{
    if (source.empty())
        throw Error(Errc::InsufficientData, "cannot resample an empty stream");
    PressureStream out;
    out.reserve(grid.size());
    auto by_time = [](const PressureFrame &f, double t) { return f.timestamp < t; };
    for (const auto &g : grid)
    {
        PressureFrame f;
        f.timestamp = g.timestamp;
        f.foot = source.front().foot;
        const auto it = std::lower_bound(source.begin(), source.end(), g.timestamp, by_time);
        if (it == source.begin())
            f.p = source.front().p;
        else if (it == source.end())
            f.p = source.back().p;
        else
        {
            const auto &a = *(it - 1);
            const auto &b = *it;
            const double w = (g.timestamp - a.timestamp) / (b.timestamp - a.timestamp);
            for (std::size_t k = 0; k < kSensors; ++k)
                f.p[k] = (1.0 - w) * a.p[k] + w * b.p[k];
        }
        out.push_back(f);
    }
    return out;
}

namespace
{
std::optional<double> unload_time(std::span<const PressureFrame> stream, double hint, const InsoleConfig &cfg)
{
    double sum = 0.0;
    int count = 0;
    for (const auto &f : stream)
        if (f.timestamp < hint && f.timestamp >= hint - 1.0)
        {
            sum += f.total();
            ++count;
        }
    if (count == 0)
        for (const auto &f : stream)
            if (f.timestamp < hint)
            {
                sum += f.total();
                ++count;
            }
    if (count == 0 || !(sum > 0.0))
        return std::nullopt;
    const double level = cfg.unload_fraction * sum / count;

    for (std::size_t i = 0; i < stream.size(); ++i)
    {
        if (stream[i].timestamp < hint)
            continue;
        const double v = stream[i].total();
        if (v < level)
        {
            if (i == 0 || stream[i - 1].timestamp < hint)
                return stream[i].timestamp;
            return crossing_time(stream[i - 1].timestamp, stream[i - 1].total(), stream[i].timestamp, v, level);
        }
    }
    return std::nullopt;
}
} // namespace

Foot detect_first_moving_foot(std::span<const PressureFrame> left, std::span<const PressureFrame> right, double hint,
                              const InsoleConfig &cfg)
{
    const auto tl = unload_time(left, hint, cfg);
    const auto tr = unload_time(right, hint, cfg);
    if (!tl && !tr)
        throw Error(Errc::NoMotionDetected, "neither foot unloads after t=" + std::to_string(hint));
    if (!tr)
        return Foot::Left;
    if (!tl)
        return Foot::Right;
    const double tie = std::max(median_period(left), median_period(right));
    return *tl <= *tr + tie ? Foot::Left : Foot::Right;
}

std::vector<double> toe_off_times(std::span<const PressureFrame> stream, const SensorLayout &layout,
                                  const InsoleConfig &cfg, double t_from)
{
    const std::size_t toe = layout.toe_row();
    const double thr = cfg.toe_off_fraction * cfg.full_scale * static_cast<double>(kCols);
    std::vector<double> out;
    bool armed = false;
    for (std::size_t i = 0; i < stream.size(); ++i)
    {
        const double v = stream[i].row_sum(toe);
        if (v >= 2.0 * thr)
            armed = true;
        if (armed && i > 0 && v < thr)
        {
            const double prev = stream[i - 1].row_sum(toe);
            if (prev >= thr)
            {
                const double t = crossing_time(stream[i - 1].timestamp, prev, stream[i].timestamp, v, thr);
                if (t >= t_from)
                    out.push_back(t);
                armed = false;
            }
        }
    }
    return out;
}

std::vector<StepEvent> segment_steps(std::span<const PressureFrame> left, std::span<const PressureFrame> right,
                                     const SensorLayout &layout, const InsoleConfig &cfg, double t_from)
{
    struct Event
    {
        double t;
        Foot foot;
    };
    std::vector<Event> events;
    for (double t : toe_off_times(left, layout, cfg, t_from))
        events.push_back({t, Foot::Left});
    for (double t : toe_off_times(right, layout, cfg, t_from))
        events.push_back({t, Foot::Right});
    std::sort(events.begin(), events.end(), [](const Event &a, const Event &b) {
        return a.t < b.t || (a.t == b.t && a.foot == Foot::Left && b.foot == Foot::Right);
    });

    std::vector<Event> alternating;
    for (const auto &e : events)
        if (alternating.empty() || alternating.back().foot != e.foot)
            alternating.push_back(e);

    if (alternating.size() < 2)
        throw Error(Errc::NoStepsFound, std::to_string(alternating.size()) + " toe-off event(s) found");

    std::vector<StepEvent> steps;
    for (std::size_t k = 0; k + 1 < alternating.size(); ++k)
    {
        StepEvent s;
        s.t_start = alternating[k].t;
        s.t_end = alternating[k + 1].t;
        s.duration = s.t_end - s.t_start;
        s.foot = alternating[k].foot;
        steps.push_back(s);
    }
    return steps;
}

std::vector<StepEvent> attach_stride(std::vector<StepEvent> steps, double stride)
{
    if (!(stride > 0.0))
        throw Error(Errc::BadConfig, "stride must be positive");
    for (auto &s : steps)
    {
        if (!(s.t_end > s.t_start))
            throw Error(Errc::SchemaError, "step at t=" + std::to_string(s.t_start) + " has non-positive duration");
        s.duration = s.t_end - s.t_start;
        s.stride = stride;
        s.speed = stride / s.duration;
    }
    return steps;
}

} // namespace fusetrack::insole
