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

#include "fusetrack/run_config.hpp"
#include "fusetrack/error.hpp"
#include "fusetrack/formats.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <set>

namespace fusetrack
{

using nlohmann::json;

namespace
{

constexpr double kDeg = kPi / 180.0;

// Keys whose numeric default may be replaced by null (meaning "off" or "derived").
const std::set<std::string> kNullable = {"scenario.noise.csi_snr_db", "scenario.scene.antenna_spacing"};

json pt(Point2 p) { return json::array({p.x, p.y}); }

json to_tree(const RunConfig &c)
{
    const auto &s = c.scenario;
    const auto &sc = s.scene;
    json scene = {{"tx", pt(sc.tx_world())},
                  {"rx", pt(sc.rx_world())},
                  {"carrier_hz", sc.carrier_hz()},
                  {"antenna_spacing", sc.antenna_spacing()},
                  {"area", {{"xmin", sc.area().xmin}, {"xmax", sc.area().xmax}, {"ymin", sc.area().ymin}, {"ymax", sc.area().ymax}}}};
    json waypoints = json::array();
    for (const auto &p : s.waypoints)
        waypoints.push_back(pt(p));
    json arc = nullptr;
    if (s.ellipse_arc)
        arc = {{"path_length", s.ellipse_arc->path_length},
               {"from_deg", s.ellipse_arc->from / kDeg},
               {"to_deg", s.ellipse_arc->to / kDeg}};

    json scenario = {
        {"scene", scene},
        {"waypoints", waypoints},
        {"ellipse_arc", arc},
        {"speed", s.speed},
        {"stride", s.stride},
        {"gait",
         {{"swing_fraction", s.gait.swing_fraction},
          {"load_per_foot", s.gait.load_per_foot},
          {"standing_cop", s.gait.standing_cop},
          {"standing_width", s.gait.standing_width},
          {"stance_width", s.gait.stance_width},
          {"unload_fraction", s.gait.unload_fraction},
          {"first_foot", s.gait.first_foot == insole::Foot::Left ? "L" : "R"}}},
        {"noise",
         {{"csi_snr_db", std::isfinite(s.noise.csi_snr_db) ? json(s.noise.csi_snr_db) : json(nullptr)},
          {"cfo_sfo", s.noise.cfo_sfo},
          {"sfo_slope_max", s.noise.sfo_slope_max},
          {"pressure_noise", s.noise.pressure_noise},
          {"doppler_sigma", s.noise.doppler_sigma},
          {"aoa_sigma_deg", s.noise.aoa_sigma / kDeg}}},
        {"timeline",
         {{"gesture_start", s.timeline.gesture_start},
          {"gesture_ramp", s.timeline.gesture_ramp},
          {"gesture_hold", s.timeline.gesture_hold},
          {"stand_after", s.timeline.stand_after},
          {"tail", s.timeline.tail}}},
        {"insole_offset", s.insole_offset},
        {"dyn_amplitude", s.dyn_amplitude},
        {"subcarrier_spacing_hz", s.subcarrier_spacing_hz},
        {"csi_rate", s.csi_rate},
        {"pressure_rate", s.pressure_rate},
        {"gt_rate", s.gt_rate},
        {"seed", s.seed}};

    json layout = nullptr;
    if (c.layout)
        layout = c.layout->y;
    const auto &in = c.insole;
    json insole = {{"full_scale", in.full_scale},       {"contact_fraction", in.contact_fraction},
                   {"forefoot_cop", in.forefoot_cop},   {"hold_s", in.hold_s},
                   {"hold_fraction", in.hold_fraction}, {"unload_fraction", in.unload_fraction},
                   {"toe_off_fraction", in.toe_off_fraction}, {"stride", in.stride},
                   {"layout_y", layout}};

    const auto &d = c.doppler;
    json doppler = {{"window", d.window},       {"hop", d.hop},           {"v_max", d.v_max},
                    {"dc_cut_hz", d.dc_cut_hz}, {"peak_ratio", d.peak_ratio}, {"denoise", d.denoise},
                    {"sg_window", d.sg_window}, {"sg_order", d.sg_order}};

    const auto &f = c.fusion;
    json fusion = {{"w_ellipse", f.w_ellipse},
                   {"w_line", f.w_line},
                   {"w_ratio", f.w_ratio},
                   {"sigma_l", f.sigma_l},
                   {"sigma_ratio", f.sigma_ratio},
                   {"sigma_aoa_deg", f.sigma_aoa / kDeg},
                   {"grid_xy", f.grid_xy},
                   {"grid_phi_deg", f.grid_phi / kDeg},
                   {"refine_tol", f.refine_tol},
                   {"y_margin", f.y_margin},
                   {"window_steps", f.window_steps},
                   {"top_k", f.top_k},
                   {"track_phi_grid_deg", f.track_phi_grid / kDeg},
                   {"heading_ambiguity", f.heading_ambiguity},
                   {"track_lost_threshold", f.track_lost_threshold},
                   {"reject_threshold", f.reject_threshold}};

    const auto &w = c.sweep;
    json sweep = {{"level", w.level == SweepLevel::Measurement ? "measurement" : "signal"},
                  {"random_walk", w.random_walk},
                  {"steps", w.steps},
                  {"min_ratio", w.min_ratio},
                  {"min_y", w.min_y},
                  {"base_seed", w.base_seed}};

    return {{"scenario", scenario}, {"insole", insole},  {"doppler", doppler},
            {"aoa", {{"window_s", c.aoa.window_s}}}, {"fusion", fusion}, {"sweep", sweep}};
}

// Overlays `user` on the defaults, rejecting unknown keys and type changes.
void merge(json &base, const json &user, const std::string &path)
{
    if (!user.is_object())
        throw Error(Errc::BadConfig, (path.empty() ? std::string("config") : path) + ": expected an object");
    for (const auto &[key, value] : user.items())
    {
        const std::string where = path.empty() ? key : path + "." + key;
        if (!base.contains(key))
            throw Error(Errc::BadConfig, "unknown key '" + where + "'");
        json &slot = base[key];
        if (slot.is_object())
        {
            merge(slot, value, where);
            continue;
        }
        const bool ok = slot.is_null() || (slot.is_number() && value.is_number()) ||
                        (slot.is_number() && value.is_null() && kNullable.count(where)) ||
                        (slot.is_boolean() && value.is_boolean()) || (slot.is_string() && value.is_string()) ||
                        (slot.is_array() && value.is_array());
        if (!ok)
            throw Error(Errc::BadConfig, "key '" + where + "' has the wrong type");
        slot = value;
    }
}

double num(const json &j, const char *key, const std::string &ctx)
{
    const json &v = j.at(key);
    if (!v.is_number())
        throw Error(Errc::BadConfig, ctx + "." + key + ": expected a number");
    return v.get<double>();
}

template <typename Int> Int integer(const json &j, const char *key, const std::string &ctx)
{
    const json &v = j.at(key);
    if (!v.is_number_integer() || (std::is_unsigned_v<Int> && v.get<long long>() < 0))
        throw Error(Errc::BadConfig, ctx + "." + key + ": expected a non-negative integer");
    return v.get<Int>();
}

Point2 point(const json &v, const std::string &ctx)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw Error(Errc::BadConfig, ctx + ": expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

RunConfig from_tree(const json &t)
{
    RunConfig c;
    const json &s = t.at("scenario");
    const json &sc = s.at("scene");
    const json &ar = sc.at("area");
    const double carrier = num(sc, "carrier_hz", "scenario.scene");
    const double spacing = sc.at("antenna_spacing").is_null() ? 0.5 * kSpeedOfLight / carrier
                                                              : num(sc, "antenna_spacing", "scenario.scene");
    try
    {
        c.scenario.scene = Scene(point(sc.at("tx"), "scenario.scene.tx"), point(sc.at("rx"), "scenario.scene.rx"),
                                 carrier, spacing,
                                 Rect{num(ar, "xmin", "area"), num(ar, "xmax", "area"), num(ar, "ymin", "area"),
                                      num(ar, "ymax", "area")});
    }
    catch (const Error &e)
    {
        throw Error(Errc::BadConfig, std::string("scenario.scene: ") + e.what());
    }

    auto &sg = c.scenario;
    sg.waypoints.clear();
    for (const auto &p : s.at("waypoints"))
        sg.waypoints.push_back(point(p, "scenario.waypoints"));
    if (const json &arc = s.at("ellipse_arc"); !arc.is_null())
    {
        json full = {{"path_length", 5.0}, {"from_deg", 40.0}, {"to_deg", 140.0}};
        merge(full, arc, "scenario.ellipse_arc");
        sg.ellipse_arc = sim::EllipseArc{num(full, "path_length", "scenario.ellipse_arc"),
                                         num(full, "from_deg", "scenario.ellipse_arc") * kDeg,
                                         num(full, "to_deg", "scenario.ellipse_arc") * kDeg};
    }
    sg.speed = num(s, "speed", "scenario");
    sg.stride = num(s, "stride", "scenario");

    const json &g = s.at("gait");
    sg.gait.swing_fraction = num(g, "swing_fraction", "scenario.gait");
    sg.gait.load_per_foot = num(g, "load_per_foot", "scenario.gait");
    sg.gait.standing_cop = num(g, "standing_cop", "scenario.gait");
    sg.gait.standing_width = num(g, "standing_width", "scenario.gait");
    sg.gait.stance_width = num(g, "stance_width", "scenario.gait");
    sg.gait.unload_fraction = num(g, "unload_fraction", "scenario.gait");
    const auto foot = g.at("first_foot").get<std::string>();
    if (foot != "L" && foot != "R")
        throw Error(Errc::BadConfig, "scenario.gait.first_foot must be \"L\" or \"R\"");
    sg.gait.first_foot = foot == "L" ? insole::Foot::Left : insole::Foot::Right;

    const json &n = s.at("noise");
    sg.noise.csi_snr_db = n.at("csi_snr_db").is_null() ? std::numeric_limits<double>::infinity()
                                                       : num(n, "csi_snr_db", "scenario.noise");
    sg.noise.cfo_sfo = n.at("cfo_sfo").get<bool>();
    sg.noise.sfo_slope_max = num(n, "sfo_slope_max", "scenario.noise");
    sg.noise.pressure_noise = num(n, "pressure_noise", "scenario.noise");
    sg.noise.doppler_sigma = num(n, "doppler_sigma", "scenario.noise");
    sg.noise.aoa_sigma = num(n, "aoa_sigma_deg", "scenario.noise") * kDeg;

    const json &tl = s.at("timeline");
    sg.timeline.gesture_start = num(tl, "gesture_start", "scenario.timeline");
    sg.timeline.gesture_ramp = num(tl, "gesture_ramp", "scenario.timeline");
    sg.timeline.gesture_hold = num(tl, "gesture_hold", "scenario.timeline");
    sg.timeline.stand_after = num(tl, "stand_after", "scenario.timeline");
    sg.timeline.tail = num(tl, "tail", "scenario.timeline");

    sg.insole_offset = num(s, "insole_offset", "scenario");
    sg.dyn_amplitude = num(s, "dyn_amplitude", "scenario");
    sg.subcarrier_spacing_hz = num(s, "subcarrier_spacing_hz", "scenario");
    sg.csi_rate = num(s, "csi_rate", "scenario");
    sg.pressure_rate = num(s, "pressure_rate", "scenario");
    sg.gt_rate = num(s, "gt_rate", "scenario");
    sg.seed = integer<std::uint64_t>(s, "seed", "scenario");

    const json &in = t.at("insole");
    c.insole.full_scale = num(in, "full_scale", "insole");
    c.insole.contact_fraction = num(in, "contact_fraction", "insole");
    c.insole.forefoot_cop = num(in, "forefoot_cop", "insole");
    c.insole.hold_s = num(in, "hold_s", "insole");
    c.insole.hold_fraction = num(in, "hold_fraction", "insole");
    c.insole.unload_fraction = num(in, "unload_fraction", "insole");
    c.insole.toe_off_fraction = num(in, "toe_off_fraction", "insole");
    c.insole.stride = num(in, "stride", "insole");
    if (!(c.insole.stride > 0.0))
        throw Error(Errc::BadConfig, "insole.stride must be positive");
    if (const json &ly = in.at("layout_y"); !ly.is_null())
    {
        if (!ly.is_array() || ly.size() != insole::kSensors)
            throw Error(Errc::BadConfig, "insole.layout_y must list 45 coordinates");
        insole::SensorLayout layout;
        for (std::size_t i = 0; i < insole::kSensors; ++i)
        {
            if (!ly[i].is_number())
                throw Error(Errc::BadConfig, "insole.layout_y entries must be numbers");
            layout.y[i] = ly[i].get<double>();
        }
        try
        {
            layout.validate();
        }
        catch (const Error &e)
        {
            throw Error(Errc::BadConfig, std::string("insole.layout_y: ") + e.what());
        }
        c.layout = layout;
    }

    const json &d = t.at("doppler");
    c.doppler.window = integer<std::size_t>(d, "window", "doppler");
    c.doppler.hop = integer<std::size_t>(d, "hop", "doppler");
    c.doppler.v_max = num(d, "v_max", "doppler");
    c.doppler.dc_cut_hz = num(d, "dc_cut_hz", "doppler");
    c.doppler.peak_ratio = num(d, "peak_ratio", "doppler");
    c.doppler.denoise = d.at("denoise").get<bool>();
    c.doppler.sg_window = integer<int>(d, "sg_window", "doppler");
    c.doppler.sg_order = integer<int>(d, "sg_order", "doppler");
    if (c.doppler.hop == 0)
        throw Error(Errc::BadConfig, "doppler.hop must be positive");

    c.aoa.window_s = num(t.at("aoa"), "window_s", "aoa");
    if (!(c.aoa.window_s > 0.0))
        throw Error(Errc::BadConfig, "aoa.window_s must be positive");

    const json &f = t.at("fusion");
    auto &fc = c.fusion;
    fc.w_ellipse = num(f, "w_ellipse", "fusion");
    fc.w_line = num(f, "w_line", "fusion");
    fc.w_ratio = num(f, "w_ratio", "fusion");
    fc.sigma_l = num(f, "sigma_l", "fusion");
    fc.sigma_ratio = num(f, "sigma_ratio", "fusion");
    fc.sigma_aoa = num(f, "sigma_aoa_deg", "fusion") * kDeg;
    fc.grid_xy = num(f, "grid_xy", "fusion");
    fc.grid_phi = num(f, "grid_phi_deg", "fusion") * kDeg;
    fc.refine_tol = num(f, "refine_tol", "fusion");
    fc.y_margin = num(f, "y_margin", "fusion");
    fc.window_steps = integer<int>(f, "window_steps", "fusion");
    fc.top_k = integer<int>(f, "top_k", "fusion");
    fc.track_phi_grid = num(f, "track_phi_grid_deg", "fusion") * kDeg;
    fc.heading_ambiguity = num(f, "heading_ambiguity", "fusion");
    fc.track_lost_threshold = num(f, "track_lost_threshold", "fusion");
    fc.reject_threshold = num(f, "reject_threshold", "fusion");
    fc.validate();

    const json &w = t.at("sweep");
    const auto level = w.at("level").get<std::string>();
    if (level != "measurement" && level != "signal")
        throw Error(Errc::BadConfig, "sweep.level must be \"measurement\" or \"signal\"");
    c.sweep.level = level == "measurement" ? SweepLevel::Measurement : SweepLevel::Signal;
    c.sweep.random_walk = w.at("random_walk").get<bool>();
    c.sweep.steps = integer<int>(w, "steps", "sweep");
    c.sweep.min_ratio = num(w, "min_ratio", "sweep");
    c.sweep.min_y = num(w, "min_y", "sweep");
    c.sweep.base_seed = integer<std::uint64_t>(w, "base_seed", "sweep");
    if (c.sweep.steps < 1)
        throw Error(Errc::BadConfig, "sweep.steps must be at least 1");
    return c;
}

} // namespace

RunConfig parse_run_config(const std::string &json_text)
{
    json user;
    try
    {
        user = json::parse(json_text);
    }
    catch (const json::parse_error &e)
    {
        throw Error(Errc::BadConfig, std::string("config is not valid JSON: ") + e.what());
    }
    json tree = to_tree(RunConfig{});
    merge(tree, user, "");
    try
    {
        return from_tree(tree);
    }
    catch (const json::exception &e)
    {
        throw Error(Errc::BadConfig, std::string("config: ") + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path &path)
{
    try
    {
        return parse_run_config(io::read_text(path));
    }
    catch (const Error &e)
    {
        if (e.code() == Errc::IoError)
            throw;
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::string dump_run_config(const RunConfig &cfg) { return to_tree(cfg).dump(2) + "\n"; }

std::string config_hash(const RunConfig &cfg)
{
    const std::string text = to_tree(cfg).dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text)
    {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace fusetrack
