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

// fusetrack command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 data or configuration error,
// 3 no feasible initial state or track lost.

#include "fusetrack/error.hpp"
#include "fusetrack/evaluation.hpp"
#include "fusetrack/formats.hpp"
#include "fusetrack/pipeline.hpp"
#include "fusetrack/run_config.hpp"
#include "fusetrack/simulator.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace fusetrack;

namespace
{

void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("fusetrack");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("%^[%l]%$ %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char *env = std::getenv("FUSETRACK_LOG_LEVEL"))
        spdlog::set_level(spdlog::level::from_str(env));
}

RunConfig config_or_default(const std::string &path)
{
    return path.empty() ? RunConfig{} : load_run_config(path);
}

insole::PressureStream read_foot(const std::string &path, insole::Foot foot)
{
    auto frames = io::read_pressure(path);
    for (const auto &f : frames)
        if (f.foot != foot)
            throw Error(Errc::SchemaError, path + ": expected only " + (foot == insole::Foot::Left ? "L" : "R") +
                                               " frames");
    return frames;
}

int cmd_simulate(const std::string &config, const std::string &out, bool gzip, const std::optional<std::uint64_t> &seed)
{
    RunConfig cfg = load_run_config(config);
    if (seed)
        cfg.scenario.seed = *seed;
    const sim::Bundle b = sim::simulate(cfg.scenario, cfg.sensor_layout());
    const BundlePaths p = write_bundle(out, b, gzip);
    io::write_text(fs::path(out) / "config.json", dump_run_config(cfg));
    std::cout << p.csi.string() << '\n'
              << p.pressure_left.string() << '\n'
              << p.pressure_right.string() << '\n'
              << p.ground_truth.string() << '\n';
    spdlog::info("simulated {} steps over {:.2f} s", b.gt.steps(), b.gt.duration);
    return 0;
}

int cmd_track(const std::string &csi_path, const std::string &left_path, const std::string &right_path,
              const std::string &config, const std::string &layout, const std::string &out)
{
    RunConfig cfg = config_or_default(config);
    if (!layout.empty())
        cfg.layout = io::read_layout(layout);
    const auto csi = io::read_csi(csi_path);
    const auto left = read_foot(left_path, insole::Foot::Left);
    const auto right = read_foot(right_path, insole::Foot::Right);
    const SignalProducts p = extract_measurements(csi, left, right, cfg);
    const TrackResult r = solve(p.measurements, cfg);
    io::TrajectoryFile f = to_trajectory_file(r, cfg);
    f.metrics["insole_offset"] = p.insole.offset;
    f.metrics["low_confidence_steps"] = static_cast<double>(
        std::count_if(p.measurements.begin(), p.measurements.end(), [](const auto &m) { return m.low_confidence; }));
    io::write_trajectory(out, f);
    return 0;
}

int cmd_evaluate(const std::string &traj, const std::string &gt, const std::string &out)
{
    const ErrorReport r = evaluate(io::read_trajectory(traj), io::read_ground_truth(gt));
    write_report(out, r);
    return 0;
}

int cmd_sweep(const std::string &config, int seeds, const std::string &out, unsigned threads, const std::string &level)
{
    RunConfig cfg = load_run_config(config);
    if (level == "measurement")
        cfg.sweep.level = SweepLevel::Measurement;
    else if (level == "signal")
        cfg.sweep.level = SweepLevel::Signal;
    const SweepResult r = run_sweep(cfg, seeds, threads);

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw Error(Errc::IoError, out + ": " + ec.message());
    for (const auto &o : r.runs)
    {
        char name[48];
        std::snprintf(name, sizeof name, "seed_%06llu.json", static_cast<unsigned long long>(o.seed));
        io::write_text(fs::path(out) / name, seed_outcome_to_string(o));
    }
    io::write_text(fs::path(out) / "aggregate.json", sweep_aggregate_to_string(r, cfg));
    if (r.initial_error)
        std::cout << "initial error mean " << r.initial_error->mean << " m, max " << r.initial_error->max << " m over "
                  << r.initial_error->n << " runs (" << r.failures << " failed)\n";
    return 0;
}

int cmd_plot(const std::string &traj, const std::string &gt_path, const std::string &out)
{
    const io::TrajectoryFile t = io::read_trajectory(traj);
    std::optional<io::GroundTruthTrace> gt;
    if (!gt_path.empty())
        gt = io::read_ground_truth(gt_path);
    std::ostringstream s;
    s << "t,x,y,phi,residual" << (gt ? ",gt_x,gt_y,error" : "") << '\n';
    for (const auto &p : t.states)
    {
        s << io::format_number(p.t) << ',' << io::format_number(p.x) << ',' << io::format_number(p.y) << ','
          << io::format_number(p.phi) << ',' << io::format_number(p.residual);
        if (gt)
        {
            const auto g = gt->at(p.t);
            if (!g)
                throw Error(Errc::NoOverlap, "state at t=" + io::format_number(p.t) + " outside the ground truth");
            s << ',' << io::format_number(g->x) << ',' << io::format_number(g->y) << ','
              << io::format_number(distance({p.x, p.y}, *g));
        }
        s << '\n';
    }
    io::write_text(out, s.str());
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    setup_logging();
    CLI::App app{"Wi-Fi CSI and pressure-insole fusion tracker"};
    app.require_subcommand(1);

    std::string config, out, csi, left, right, layout, traj, gt, level;
    bool gzip = false;
    int seeds = 0;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;

    auto *sim_cmd = app.add_subcommand("simulate", "Generate CSI, insole and ground-truth traces for a scenario");
    sim_cmd->add_option("--config", config, "run configuration (JSON)")->required();
    sim_cmd->add_option("--out", out, "output directory")->required();
    sim_cmd->add_option("--seed", seed, "override scenario.seed");
    sim_cmd->add_flag("--gzip", gzip, "gzip the CSV outputs");

    auto *track_cmd = app.add_subcommand("track", "Estimate a trajectory from recorded traces");
    track_cmd->add_option("--csi", csi, "CSI CSV")->required();
    track_cmd->add_option("--pressure-left", left, "left insole CSV")->required();
    track_cmd->add_option("--pressure-right", right, "right insole CSV")->required();
    track_cmd->add_option("--config", config, "run configuration (JSON); defaults when omitted");
    track_cmd->add_option("--layout", layout, "insole sensor layout CSV");
    track_cmd->add_option("--out", out, "trajectory JSON")->required();

    auto *eval_cmd = app.add_subcommand("evaluate", "Compare a trajectory with ground truth");
    eval_cmd->add_option("--trajectory", traj, "trajectory JSON")->required();
    eval_cmd->add_option("--ground-truth", gt, "ground-truth CSV")->required();
    eval_cmd->add_option("--out", out, "report JSON")->required();

    auto *sweep_cmd = app.add_subcommand("sweep", "Run a seeded batch of scenarios and aggregate the errors");
    sweep_cmd->add_option("--config", config, "run configuration (JSON)")->required();
    sweep_cmd->add_option("--seeds", seeds, "number of seeds")->required()->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--out", out, "output directory")->required();
    sweep_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
    sweep_cmd->add_option("--level", level, "override sweep.level")->check(CLI::IsMember({"measurement", "signal"}));

    auto *plot_cmd = app.add_subcommand("plot-data", "Export trajectory points and errors as CSV");
    plot_cmd->add_option("--trajectory", traj, "trajectory JSON")->required();
    plot_cmd->add_option("--ground-truth", gt, "ground-truth CSV");
    plot_cmd->add_option("--out", out, "output CSV")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        std::cerr << "fusetrack: " << e.what() << "\n" << app.help();
        return 1;
    }

    try
    {
        if (sim_cmd->parsed())
            return cmd_simulate(config, out, gzip, seed);
        if (track_cmd->parsed())
            return cmd_track(csi, left, right, config, layout, out);
        if (eval_cmd->parsed())
            return cmd_evaluate(traj, gt, out);
        if (sweep_cmd->parsed())
            return cmd_sweep(config, seeds, out, threads, level);
        if (plot_cmd->parsed())
            return cmd_plot(traj, gt, out);
    }
    catch (const Error &e)
    {
        std::cerr << "fusetrack: " << e.what() << '\n';
        return e.code() == Errc::NoFeasibleState || e.code() == Errc::TrackLost ? 3 : 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "fusetrack: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
