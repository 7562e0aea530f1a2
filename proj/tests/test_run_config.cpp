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

#include "fusetrack/error.hpp"
#include "fusetrack/run_config.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace fusetrack;
using nlohmann::json;

namespace
{

std::string fnv1a64(const std::string &s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s)
        h = (h ^ c) * 0x100000001b3ull;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void expect_bad(const std::string &text)
{
    try
    {
        parse_run_config(text);
        ADD_FAILURE() << "accepted: " << text;
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), Errc::BadConfig) << e.what();
    }
}

} // namespace

TEST(RunConfig, EmptyDocumentGivesModuleDefaults)
{
    const auto c = parse_run_config("{}");
    EXPECT_EQ(dump_run_config(c), dump_run_config(RunConfig{}));
    EXPECT_EQ(c.doppler.window, 1024u);
    EXPECT_EQ(c.doppler.hop, 128u);
    EXPECT_DOUBLE_EQ(c.doppler.dc_cut_hz, 1.5);
    EXPECT_DOUBLE_EQ(c.aoa.window_s, 0.4);
    EXPECT_DOUBLE_EQ(c.scenario.scene.d_los(), 4.0);
    EXPECT_EQ(c.sweep.level, SweepLevel::Measurement);
    EXPECT_FALSE(c.layout.has_value());
}

TEST(RunConfig, DumpIsAFixedPointAndListsEveryKey)
{
    const auto text = dump_run_config(RunConfig{});
    const auto again = dump_run_config(parse_run_config(text));
    EXPECT_EQ(again, text);
    const auto j = json::parse(text);
    for (const char *k : {"scenario", "insole", "doppler", "aoa", "fusion", "sweep"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_TRUE(j["scenario"]["noise"].contains("aoa_sigma_deg"));
    EXPECT_TRUE(j["fusion"].contains("track_lost_threshold"));
    EXPECT_TRUE(j["insole"]["layout_y"].is_null());
}

TEST(RunConfig, PartialOverridesMerge)
{
    const auto c = parse_run_config(R"({"scenario":{"waypoints":[[0.5,0.5],[2,2],[3,1]],"seed":7,
        "noise":{"csi_snr_db":null,"aoa_sigma_deg":2.0}},"doppler":{"dc_cut_hz":0.5},
        "sweep":{"level":"signal","steps":6}})");
    ASSERT_EQ(c.scenario.waypoints.size(), 3u);
    EXPECT_DOUBLE_EQ(c.scenario.waypoints[2].x, 3.0);
    EXPECT_EQ(c.scenario.seed, 7u);
    EXPECT_TRUE(std::isinf(c.scenario.noise.csi_snr_db));
    EXPECT_NEAR(c.scenario.noise.aoa_sigma, 2.0 * kPi / 180.0, 1e-15);
    EXPECT_TRUE(c.scenario.noise.cfo_sfo);
    EXPECT_DOUBLE_EQ(c.doppler.dc_cut_hz, 0.5);
    EXPECT_EQ(c.doppler.window, 1024u);
    EXPECT_EQ(c.sweep.level, SweepLevel::Signal);
    EXPECT_EQ(c.sweep.steps, 6);
}

TEST(RunConfig, SceneAndEllipseArc)
{
    const auto c = parse_run_config(R"({"scenario":{"scene":{"rx":[0,5],"antenna_spacing":null,"carrier_hz":2.4e9},
        "ellipse_arc":{"to_deg":120}}})");
    EXPECT_DOUBLE_EQ(c.scenario.scene.d_los(), 5.0);
    EXPECT_NEAR(c.scenario.scene.antenna_spacing(), 0.5 * 299792458.0 / 2.4e9, 1e-15);
    ASSERT_TRUE(c.scenario.ellipse_arc.has_value());
    EXPECT_DOUBLE_EQ(c.scenario.ellipse_arc->path_length, 5.0);
    EXPECT_NEAR(c.scenario.ellipse_arc->to, 120.0 * kPi / 180.0, 1e-15);
}

TEST(RunConfig, RejectsUnknownKeysAndWrongTypes)
{
    expect_bad("{ nope");
    expect_bad("[]");
    expect_bad(R"({"bogus":1})");
    expect_bad(R"({"doppler":{"windw":512}})");
    expect_bad(R"({"scenario":{"noise":{"snr":20}}})");
    expect_bad(R"({"doppler":{"window":"1024"}})");
    expect_bad(R"({"doppler":{"window":-4}})");
    expect_bad(R"({"doppler":{"window":1.5}})");
    expect_bad(R"({"doppler":{"hop":0}})");
    expect_bad(R"({"scenario":{"noise":{"cfo_sfo":1}}})");
    expect_bad(R"({"scenario":{"waypoints":[[1,2,3]]}})");
    expect_bad(R"({"scenario":{"gait":{"first_foot":"X"}}})");
    expect_bad(R"({"scenario":{"speed":null}})");
    expect_bad(R"({"scenario":{"scene":{"rx":[0,0]}}})");
    expect_bad(R"({"sweep":{"level":"pixel"}})");
    expect_bad(R"({"sweep":{"steps":0}})");
    expect_bad(R"({"insole":{"layout_y":[1,2,3]}})");
    expect_bad(R"({"fusion":{"w_ellipse":0,"w_line":0,"w_ratio":0}})");
}

TEST(RunConfig, HashIsFnv1aOfTheCompactCanonicalDump)
{
    EXPECT_EQ(fnv1a64(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a64("a"), "af63dc4c8601ec8c");

    const RunConfig c;
    const auto compact = json::parse(dump_run_config(c)).dump();
    EXPECT_EQ(config_hash(c), fnv1a64(compact));

    auto d = c;
    d.scenario.seed = 2;
    EXPECT_NE(config_hash(d), config_hash(c));
    EXPECT_EQ(config_hash(parse_run_config(dump_run_config(d))), config_hash(d));
}

TEST(RunConfig, RepositoryScenariosLoad)
{
    const std::filesystem::path dir = std::filesystem::path(FUSETRACK_SOURCE_DIR) / "scenarios";
    int n = 0;
    for (const auto &e : std::filesystem::recursive_directory_iterator(dir))
    {
        if (e.path().extension() != ".json")
            continue;
        EXPECT_NO_THROW(load_run_config(e.path())) << e.path();
        ++n;
    }
    EXPECT_GE(n, 14);
    try
    {
        load_run_config(dir / "does_not_exist.json");
        ADD_FAILURE();
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), Errc::IoError);
    }
}
