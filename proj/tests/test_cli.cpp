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
#include "fusetrack/formats.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

const fs::path kScenarios = fs::path(FUSETRACK_SOURCE_DIR) / "scenarios";

class CliTest : public ::testing::Test
{
  protected:
    void SetUp() override
    {
        std::random_device rd;
        dir_ = fs::temp_directory_path() / ("fusetrack_cli_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    // Exit status of the CLI; stderr goes to dir/stderr.txt.
    int run(const std::string &args)
    {
        const std::string cmd =
            std::string("'") + FUSETRACK_CLI + "' " + args + " > '" + (dir_ / "stdout.txt").string() + "' 2> '" +
            (dir_ / "stderr.txt").string() + "'";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string stderr_text() const { return fusetrack::io::read_text(dir_ / "stderr.txt"); }
    std::string q(const fs::path &p) const { return "'" + p.string() + "'"; }
    fs::path operator/(const std::string &name) const { return dir_ / name; }

    fs::path dir_;
};

void put(const fs::path &p, const std::string &text)
{
    std::ofstream(p) << text;
}

} // namespace

TEST_F(CliTest, UsageErrorsExitOne)
{
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("track --pressure-left a --pressure-right b --out c"), 1);
    EXPECT_NE(stderr_text().find("--csi"), std::string::npos);
    EXPECT_EQ(run("sweep --config x --seeds 0 --out y"), 1);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(CliTest, DataErrorsExitTwo)
{
    put(*this / "bad.json", R"({"unknown_section":{}})");
    EXPECT_EQ(run("simulate --config " + q(*this / "bad.json") + " --out " + q(*this / "o")), 2);
    const std::string err = stderr_text();
    EXPECT_NE(err.find("BadConfig"), std::string::npos) << err;
    EXPECT_EQ(std::count(err.begin(), err.end(), '\n'), 1) << err;

    EXPECT_EQ(run("evaluate --trajectory " + q(*this / "none.json") + " --ground-truth " + q(*this / "none.csv") +
                  " --out " + q(*this / "r.json")),
              2);
    put(*this / "gt.csv", "ts_s,x_m,y_m\n0,1,1\n0,1,1\n");
    put(*this / "t.json", "{}");
    EXPECT_EQ(run("evaluate --trajectory " + q(*this / "t.json") + " --ground-truth " + q(*this / "gt.csv") + " --out " +
                  q(*this / "r.json")),
              2);
}

TEST_F(CliTest, SimulateTrackEvaluatePlotOnTheDefaultScenario)
{
    const auto cfg = q(kScenarios / "default.json");
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + q(*this / "a")), 0) << stderr_text();
    for (const char *f : {"csi.csv", "pressure_left.csv", "pressure_right.csv", "ground_truth.csv", "config.json"})
        EXPECT_TRUE(fs::exists(*this / "a" / f)) << f;

    ASSERT_EQ(run("simulate --config " + cfg + " --out " + q(*this / "b")), 0);
    for (const char *f : {"csi.csv", "pressure_left.csv", "pressure_right.csv", "ground_truth.csv"})
        EXPECT_EQ(fusetrack::io::read_text(*this / "a" / f), fusetrack::io::read_text(*this / "b" / f)) << f;
    ASSERT_EQ(run("simulate --config " + cfg + " --seed 9 --out " + q(*this / "c")), 0);
    EXPECT_NE(fusetrack::io::read_text(*this / "a" / "csi.csv"), fusetrack::io::read_text(*this / "c" / "csi.csv"));
    EXPECT_EQ(fusetrack::io::read_text(*this / "a" / "ground_truth.csv"),
              fusetrack::io::read_text(*this / "c" / "ground_truth.csv"));

    const auto a = *this / "a";
    ASSERT_EQ(run("track --csi " + q(a / "csi.csv") + " --pressure-left " + q(a / "pressure_left.csv") +
                  " --pressure-right " + q(a / "pressure_right.csv") + " --config " + cfg + " --out " +
                  q(*this / "traj.json")),
              0)
        << stderr_text();
    const auto traj = fusetrack::io::read_trajectory(*this / "traj.json");
    EXPECT_EQ(traj.config_hash.size(), 16u);
    EXPECT_GE(traj.states.size(), 2u);

    ASSERT_EQ(run("evaluate --trajectory " + q(*this / "traj.json") + " --ground-truth " + q(a / "ground_truth.csv") +
                  " --out " + q(*this / "report.json")),
              0)
        << stderr_text();
    const auto report = fusetrack::report_from_string(fusetrack::io::read_text(*this / "report.json"));
    EXPECT_EQ(report.summary.n, traj.states.size());
    EXPECT_LT(report.initial_error, 0.3);
    EXPECT_LT(report.summary.max, 0.5);

    ASSERT_EQ(run("plot-data --trajectory " + q(*this / "traj.json") + " --ground-truth " + q(a / "ground_truth.csv") +
                  " --out " + q(*this / "plot.csv")),
              0);
    const std::string plot = fusetrack::io::read_text(*this / "plot.csv");
    EXPECT_EQ(plot.substr(0, plot.find('\n')), "t,x,y,phi,residual,gt_x,gt_y,error");
    EXPECT_EQ(static_cast<std::size_t>(std::count(plot.begin(), plot.end(), '\n')), traj.states.size() + 1);
}

TEST_F(CliTest, GzipBundleTracksLikePlain)
{
    const auto cfg = q(kScenarios / "default.json");
    ASSERT_EQ(run("simulate --config " + cfg + " --gzip --out " + q(*this / "z")), 0);
    const auto z = *this / "z";
    ASSERT_TRUE(fs::exists(z / "csi.csv.gz"));
    EXPECT_EQ(run("track --csi " + q(z / "csi.csv.gz") + " --pressure-left " + q(z / "pressure_left.csv.gz") +
                  " --pressure-right " + q(z / "pressure_right.csv.gz") + " --config " + cfg + " --out " +
                  q(*this / "t.json")),
              0)
        << stderr_text();
}

TEST_F(CliTest, TangentialWalkExitsThree)
{
    const auto cfg = q(kScenarios / "tangential.json");
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + q(*this / "t")), 0) << stderr_text();
    const auto t = *this / "t";
    EXPECT_EQ(run("track --csi " + q(t / "csi.csv") + " --pressure-left " + q(t / "pressure_left.csv") +
                  " --pressure-right " + q(t / "pressure_right.csv") + " --config " + cfg + " --out " +
                  q(*this / "traj.json")),
              3);
    EXPECT_NE(stderr_text().find("NoFeasibleState"), std::string::npos) << stderr_text();
}

TEST_F(CliTest, SweepWritesOneReportPerSeedAndAnExactAggregate)
{
    ASSERT_EQ(run("sweep --config " + q(kScenarios / "calibration_base.json") + " --seeds 6 --threads 2 --out " +
                  q(*this / "s")),
              0)
        << stderr_text();
    std::vector<fs::path> reports;
    for (const auto &e : fs::directory_iterator(*this / "s"))
        if (e.path().filename().string().rfind("seed_", 0) == 0)
            reports.push_back(e.path());
    ASSERT_EQ(reports.size(), 6u);
    std::sort(reports.begin(), reports.end());

    const auto agg = json::parse(fusetrack::io::read_text(*this / "s" / "aggregate.json"));
    EXPECT_EQ(agg["seeds"], 6);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto &p : reports)
    {
        const auto j = json::parse(fusetrack::io::read_text(p));
        if (j["status"] != "ok")
            continue;
        sum += j["report"]["initial_error"].get<double>();
        ++n;
    }
    ASSERT_GT(n, 0u);
    EXPECT_EQ(agg["initial_error"]["n"], n);
    EXPECT_EQ(agg["initial_error"]["mean"].get<double>(), sum / static_cast<double>(n));
}
