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

// Scales the measurement-level Doppler and AoA noise by one common factor until the mean
// initial-position error of a seeded random-walk batch hits a target, then writes the
// resulting configuration. The fusion noise scales follow the injected noise, and the
// track-lost threshold is set to 10x the median per-step residual of the final batch.

#include "fusetrack/error.hpp"
#include "fusetrack/pipeline.hpp"
#include "fusetrack/run_config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

using namespace fusetrack;

namespace
{

struct BatchStats
{
    double mean_initial = 0.0;
    double max_initial = 0.0;
    double median_residual = 0.0;
    int failures = 0;
};

RunConfig scaled(const RunConfig &base, double m)
{
    RunConfig c = base;
    c.scenario.noise.doppler_sigma = m * base.scenario.noise.doppler_sigma;
    c.scenario.noise.aoa_sigma = m * base.scenario.noise.aoa_sigma;
    if (m > 0.0)
    {
        const double step_t = c.scenario.stride / c.scenario.speed;
        c.fusion.sigma_l = c.scenario.noise.doppler_sigma * step_t;
        c.fusion.sigma_ratio = c.scenario.noise.doppler_sigma / c.scenario.speed;
        c.fusion.sigma_aoa = c.scenario.noise.aoa_sigma;
    }
    return c;
}

BatchStats run_batch(const RunConfig &cfg, int seeds)
{
    BatchStats s;
    std::vector<double> errors, residuals;
    for (int i = 0; i < seeds; ++i)
    {
        try
        {
            const sim::ScenarioConfig sc = sweep_scenario(cfg, i);
            const auto gt = sim::gen_trajectory(sc);
            const auto meas = sim::gen_measurements(gt, sc);
            RunConfig rc = cfg;
            rc.scenario = sc;
            const auto init = estimate_initial_state(meas, sc.scene, rc.fusion);
            FusionConfig loose = rc.fusion;
            loose.track_lost_threshold = 1e300;
            const auto traj = track(init.state, meas, sc.scene, loose, init.residual);
            const Point2 p0 = sc.scene.to_world(traj.states.front().pos());
            errors.push_back(distance(p0, gt.position_at(traj.times.front())));
            residuals.insert(residuals.end(), traj.residuals.begin() + 1, traj.residuals.end());
        }
        catch (const Error &)
        {
            ++s.failures;
        }
    }
    if (errors.empty())
        throw Error(Errc::InsufficientData, "every calibration run failed");
    s.mean_initial = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    s.max_initial = *std::max_element(errors.begin(), errors.end());
    if (!residuals.empty())
    {
        auto mid = residuals.begin() + static_cast<std::ptrdiff_t>(residuals.size() / 2);
        std::nth_element(residuals.begin(), mid, residuals.end());
        s.median_residual = *mid;
    }
    return s;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Calibrate simulated measurement noise against a target mean initial-position error"};
    std::string config, out;
    int seeds = 50;
    double target = 0.1541;
    double m_hi = 8.0;
    int iterations = 18;
    app.add_option("--config", config, "base run configuration; its noise sigmas define the unit")->required();
    app.add_option("--out", out, "calibrated configuration to write")->required();
    app.add_option("--seeds", seeds, "scenarios per evaluation")->check(CLI::PositiveNumber);
    app.add_option("--target", target, "target mean initial-position error, m");
    app.add_option("--max-scale", m_hi, "upper end of the scale search");
    app.add_option("--iterations", iterations, "bisection steps");
    CLI11_PARSE(app, argc, argv);

    try
    {
        const RunConfig base = load_run_config(config);
        if (!(base.scenario.noise.doppler_sigma > 0.0 || base.scenario.noise.aoa_sigma > 0.0))
            throw Error(Errc::BadConfig, "base config needs non-zero doppler_sigma or aoa_sigma_deg");
        double lo = 0.0, hi = m_hi;
        if (run_batch(scaled(base, hi), seeds).mean_initial < target)
            throw Error(Errc::BadConfig, "target not reached at the largest scale; raise --max-scale");
        for (int it = 0; it < iterations; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            const BatchStats s = run_batch(scaled(base, mid), seeds);
            std::cout << "scale " << mid << ": mean " << s.mean_initial << " m, max " << s.max_initial << " m, "
                      << s.failures << " failed\n";
            (s.mean_initial < target ? lo : hi) = mid;
        }
        const double m = 0.5 * (lo + hi);
        RunConfig cal = scaled(base, m);
        const BatchStats s = run_batch(cal, seeds);
        cal.fusion.track_lost_threshold = 10.0 * s.median_residual;
        io::write_text(out, dump_run_config(cal));
        std::cout << "scale " << m << ": doppler_sigma " << cal.scenario.noise.doppler_sigma << " m/s, aoa_sigma "
                  << cal.scenario.noise.aoa_sigma * 180.0 / kPi << " deg, mean " << s.mean_initial << " m, max "
                  << s.max_initial << " m, track_lost_threshold " << cal.fusion.track_lost_threshold << "\n";
    }
    catch (const Error &e)
    {
        std::cerr << "fusetrack_calibrate: " << errc_name(e.code()) << ": " << e.what() << '\n';
        return 2;
    }
    return 0;
}
