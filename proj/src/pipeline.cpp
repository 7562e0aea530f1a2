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

#include "fusetrack/pipeline.hpp"
#include "fusetrack/error.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <thread>

namespace fusetrack
{

using nlohmann::json;

InsoleResult process_insoles(std::span<const insole::PressureFrame> left, std::span<const insole::PressureFrame> right,
                             const RunConfig &cfg)
{
    const insole::SensorLayout layout = cfg.sensor_layout();
    InsoleResult r;
    r.offset = insole::align_streams(left, right, layout, cfg.insole);
    const auto right_aligned = insole::resample_onto(insole::shift_stream(right, r.offset), left);
    r.sync_time = insole::detect_sync_feature(left, layout, cfg.insole);
    const double t_from = r.sync_time + cfg.insole.hold_s;
    r.first_foot = insole::detect_first_moving_foot(left, right_aligned, t_from, cfg.insole);
    r.steps = insole::attach_stride(insole::segment_steps(left, right_aligned, layout, cfg.insole, t_from),
                                    cfg.insole.stride);
    if (r.steps.front().foot != r.first_foot)
        spdlog::warn("first toe-off belongs to the {} foot but the {} foot unloaded first",
                     r.steps.front().foot == insole::Foot::Left ? "left" : "right",
                     r.first_foot == insole::Foot::Left ? "left" : "right");
    spdlog::debug("insole offset {:.3f} s, sync at {:.3f} s, {} steps", r.offset, r.sync_time, r.steps.size());
    return r;
}

SignalProducts extract_measurements(std::span<const csi::CsiFrame> csi, std::span<const insole::PressureFrame> left,
                                    std::span<const insole::PressureFrame> right, const RunConfig &cfg)
{
    SignalProducts p;
    p.insole = process_insoles(left, right, cfg);
    const Scene &scene = cfg.scenario.scene;
    p.doppler = csi::estimate_doppler_velocity(csi, cfg.doppler, scene.wavelength());
    std::vector<double> starts;
    for (const auto &s : p.insole.steps)
        starts.push_back(s.t_start);
    p.aoa = csi::estimate_aoa_series(csi, starts, cfg.aoa, scene.wavelength(), scene.antenna_spacing());
    p.measurements = build_measurements(p.insole.steps, p.doppler, p.aoa);
    for (std::size_t k = 0; k < p.measurements.size(); ++k)
    {
        const auto &m = p.measurements[k];
        spdlog::debug("step {}: t=[{:.3f}, {:.3f}] dL={:.4f} ratio={:.3f} aoa={} low_conf={}", k, m.step.t_start,
                      m.step.t_end, m.delta_l, m.v_ratio, m.alpha_r_meas ? std::to_string(*m.alpha_r_meas) : "none",
                      m.low_confidence);
    }
    return p;
}

TrackResult solve(std::span<const StepMeasurement> meas, const RunConfig &cfg)
{
    TrackResult r;
    r.initial = estimate_initial_state(meas, cfg.scenario.scene, cfg.fusion);
    if (r.initial.rejected)
        spdlog::warn("initial residual {:.3g} exceeds the rejection threshold", r.initial.residual);
    r.trajectory = track(r.initial.state, meas, cfg.scenario.scene, cfg.fusion, r.initial.residual);
    return r;
}

io::TrajectoryFile to_trajectory_file(const TrackResult &result, const RunConfig &cfg)
{
    const Scene &scene = cfg.scenario.scene;
    io::TrajectoryFile f;
    f.scene = {scene.tx_world(), scene.rx_world(), scene.carrier_hz(), scene.antenna_spacing(), scene.area()};
    f.config_hash = config_hash(cfg);
    const Trajectory &t = result.trajectory;
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        const Point2 w = scene.to_world(t.states[i].pos());
        f.states.push_back({t.times[i], w.x, w.y, scene.heading_to_world(t.states[i].phi), t.residuals[i]});
    }
    f.metrics["initial_residual"] = result.initial.residual;
    f.metrics["initial_rejected"] = result.initial.rejected ? 1.0 : 0.0;
    f.metrics["steps"] = static_cast<double>(t.size() > 0 ? t.size() - 1 : 0);
    double worst = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
        worst = std::max(worst, t.residuals[i]);
    f.metrics["max_step_residual"] = worst;
    return f;
}

io::GroundTruthTrace ground_truth_trace(const sim::GroundTruth &gt) { return {gt.times, gt.positions}; }

BundlePaths bundle_paths(const std::filesystem::path &dir, bool gzip)
{
    const std::string ext = gzip ? ".csv.gz" : ".csv";
    return {dir / ("csi" + ext), dir / ("pressure_left" + ext), dir / ("pressure_right" + ext),
            dir / ("ground_truth" + ext)};
}

BundlePaths write_bundle(const std::filesystem::path &dir, const sim::Bundle &bundle, bool gzip)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error(Errc::IoError, dir.string() + ": " + ec.message());
    const BundlePaths p = bundle_paths(dir, gzip);
    io::write_csi(p.csi, bundle.csi, gzip);
    io::write_pressure(p.pressure_left, bundle.pressure.left, gzip);
    io::write_pressure(p.pressure_right, bundle.pressure.right, gzip);
    io::write_ground_truth(p.ground_truth, ground_truth_trace(bundle.gt), gzip);
    return p;
}

sim::ScenarioConfig sweep_scenario(const RunConfig &cfg, int index)
{
    sim::ScenarioConfig sc = cfg.scenario;
    sc.seed = cfg.sweep.base_seed + static_cast<std::uint64_t>(index);
    if (cfg.sweep.random_walk)
    {
        std::mt19937_64 rng(sc.seed);
        sc.ellipse_arc.reset();
        sc.waypoints = sim::random_straight_walk(sc.scene, cfg.sweep.steps, sc.stride, rng, cfg.sweep.min_ratio,
                                                 cfg.sweep.min_y);
    }
    return sc;
}

namespace
{

SeedOutcome run_seed(const RunConfig &cfg, int index)
{
    SeedOutcome o;
    try
    {
        RunConfig rc = cfg;
        rc.scenario = sweep_scenario(cfg, index);
        o.seed = rc.scenario.seed;
        o.waypoints = rc.scenario.waypoints;
        const sim::GroundTruth gt = sim::gen_trajectory(rc.scenario);
        std::vector<StepMeasurement> meas;
        if (cfg.sweep.level == SweepLevel::Measurement)
            meas = sim::gen_measurements(gt, rc.scenario);
        else
        {
            const auto csi = sim::gen_csi(gt, rc.scenario);
            const auto pressure = sim::gen_pressure(gt, rc.sensor_layout(), rc.scenario);
            meas = extract_measurements(csi, pressure.left, pressure.right, rc).measurements;
        }
        const TrackResult r = solve(meas, rc);
        o.report = evaluate(to_trajectory_file(r, rc), ground_truth_trace(gt));
    }
    catch (const Error &e)
    {
        o.status = std::string(errc_name(e.code()));
        o.message = e.what();
    }
    return o;
}

std::optional<Summary> summary_of(const std::vector<double> &v)
{
    if (v.empty())
        return std::nullopt;
    return summarize(v);
}

json summary_json(const std::optional<Summary> &s)
{
    if (!s)
        return nullptr;
    return {{"n", s->n}, {"mean", s->mean}, {"std", s->std ? json(*s->std) : json(nullptr)}, {"min", s->min},
            {"max", s->max}};
}

} // namespace

SweepResult run_sweep(const RunConfig &cfg, int seeds, unsigned threads)
{
    if (seeds < 1)
        throw Error(Errc::BadConfig, "sweep needs at least one seed");
    SweepResult out;
    out.runs.resize(static_cast<std::size_t>(seeds));
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds));

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < seeds; i = next++)
            out.runs[static_cast<std::size_t>(i)] = run_seed(cfg, i);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();

    std::vector<double> initial, mean_step, endpoint;
    for (const auto &r : out.runs)
    {
        if (!r.report)
        {
            ++out.failures;
            continue;
        }
        initial.push_back(r.report->initial_error);
        mean_step.push_back(r.report->mean_step_error());
        endpoint.push_back(r.report->endpoint_error());
    }
    out.initial_error = summary_of(initial);
    out.mean_step_error = summary_of(mean_step);
    out.endpoint_error = summary_of(endpoint);
    return out;
}

std::string seed_outcome_to_string(const SeedOutcome &o)
{
    json j;
    j["seed"] = o.seed;
    j["status"] = o.status;
    if (!o.message.empty())
        j["message"] = o.message;
    json wp = json::array();
    for (const auto &p : o.waypoints)
        wp.push_back({p.x, p.y});
    j["waypoints"] = wp;
    j["report"] = o.report ? json::parse(report_to_string(*o.report)) : json(nullptr);
    return j.dump(2) + "\n";
}

std::string sweep_aggregate_to_string(const SweepResult &r, const RunConfig &cfg)
{
    json j;
    j["config_hash"] = config_hash(cfg);
    j["level"] = cfg.sweep.level == SweepLevel::Measurement ? "measurement" : "signal";
    j["seeds"] = r.runs.size();
    j["failures"] = r.failures;
    json seeds = json::array();
    for (const auto &o : r.runs)
        seeds.push_back(o.seed);
    j["seed_list"] = seeds;
    j["initial_error"] = summary_json(r.initial_error);
    j["mean_step_error"] = summary_json(r.mean_step_error);
    j["endpoint_error"] = summary_json(r.endpoint_error);
    return j.dump(2) + "\n";
}

} // namespace fusetrack
