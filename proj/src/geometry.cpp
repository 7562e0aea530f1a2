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

#include "fusetrack/geometry.hpp"
#include "fusetrack/error.hpp"

#include <algorithm>
#include <string>

namespace fusetrack
{

std::string_view errc_name(Errc code) noexcept
{
    switch (code)
    {
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::DegenerateEllipse: return "DegenerateEllipse";
    case Errc::BadFilterParams: return "BadFilterParams";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::AmbiguousAoa: return "AmbiguousAoa";
    case Errc::FeatureNotFound: return "FeatureNotFound";
    case Errc::NoMotionDetected: return "NoMotionDetected";
    case Errc::NoStepsFound: return "NoStepsFound";
    case Errc::NoFeasibleState: return "NoFeasibleState";
    case Errc::TrackLost: return "TrackLost";
    case Errc::BadScenario: return "BadScenario";
    case Errc::BadConfig: return "BadConfig";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::NoOverlap: return "NoOverlap";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

double wrap_angle(double a)
{
    a = std::remainder(a, 2.0 * kPi); // [-pi, pi]
    if (a <= -kPi)
        a += 2.0 * kPi;
    return a;
}

Point2 Rect::clamp(Point2 p) const
{
    return {std::clamp(p.x, xmin, xmax), std::clamp(p.y, ymin, ymax)};
}

Scene::Scene(Point2 tx_world, Point2 rx_world, double carrier_hz, double antenna_spacing, Rect area)
    : tx_world_(tx_world), rx_world_(rx_world), carrier_hz_(carrier_hz), antenna_spacing_(antenna_spacing),
      area_(area), d_los_(distance(tx_world, rx_world)),
      rotation_(std::atan2(rx_world.y - tx_world.y, rx_world.x - tx_world.x))
{
    if (!(d_los_ > 0.0))
        throw Error(Errc::DegenerateGeometry, "Tx and Rx positions coincide");
    if (!(carrier_hz > 0.0))
        throw Error(Errc::BadConfig, "carrier frequency must be positive");
    if (!(antenna_spacing > 0.0))
        throw Error(Errc::BadConfig, "antenna spacing must be positive");
    if (area.xmax < area.xmin || area.ymax < area.ymin)
        throw Error(Errc::BadConfig, "sensing area has negative extent");
}

Scene Scene::default_scene()
{
    const double carrier = 5.32e9;
    return Scene({0.0, 0.0}, {4.0, 0.0}, carrier, 0.5 * kSpeedOfLight / carrier, Rect{0.0, 4.0, 0.0, 4.0});
}

Point2 Scene::to_canonical(Point2 world) const
{
    const Point2 d = world - tx_world_;
    const double c = std::cos(rotation_), s = std::sin(rotation_);
    return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

Point2 Scene::to_world(Point2 canonical) const
{
    const double c = std::cos(rotation_), s = std::sin(rotation_);
    return Point2{c * canonical.x - s * canonical.y, s * canonical.x + c * canonical.y} + tx_world_;
}

DeviceAngles angles_from_position(const Scene &scene, Point2 pos)
{
    if (pos == scene.tx() || pos == scene.rx())
        throw Error(Errc::DegenerateGeometry, "position coincides with a device");
    // atan2 returns -pi for (-0, negative); fold into (-pi, pi].
    return {wrap_angle(std::atan2(pos.y, pos.x)), wrap_angle(std::atan2(pos.y, pos.x - scene.d_los()))};
}

double doppler_ratio(double alpha_t, double alpha_r, double phi)
{
    return 2.0 * std::cos(0.5 * (alpha_t - alpha_r)) * std::cos(0.5 * (alpha_t + alpha_r) - phi);
}

double path_length(const Scene &scene, Point2 pos)
{
    return norm(pos) + std::hypot(pos.x - scene.d_los(), pos.y);
}

EllipseParams ellipse_from_path_length(double path_len, double d_los)
{
    if (!(path_len > d_los))
        throw Error(Errc::DegenerateEllipse,
                    "path length " + std::to_string(path_len) + " does not exceed d_LoS " + std::to_string(d_los));
    const double a = 0.5 * path_len;
    const double c = 0.5 * d_los;
    return {a, std::sqrt(a * a - c * c), c};
}

double ellipse_equation(const EllipseParams &e, double d_los, Point2 pos)
{
    const double dx = pos.x - 0.5 * d_los;
    return dx * dx / (e.a * e.a) + pos.y * pos.y / (e.b * e.b) - 1.0;
}

TargetState propagate(const TargetState &state, double distance)
{
    return {state.x + distance * std::cos(state.phi), state.y + distance * std::sin(state.phi), state.phi};
}

double departure_angle_recursion(Point2 pos_t, Point2 pos_t1)
{
    if (norm(pos_t) == 0.0 || norm(pos_t1) == 0.0)
        throw Error(Errc::DegenerateGeometry, "position coincides with Tx");
    const double alpha_next = std::atan2(pos_t1.y, pos_t1.x);
    // Signed angle from pos_t1 to pos_t around the origin.
    const double cross = pos_t1.x * pos_t.y - pos_t1.y * pos_t.x;
    const double dot = pos_t1.x * pos_t.x + pos_t1.y * pos_t.y;
    const double beta = std::atan2(cross, dot);
    return wrap_angle(alpha_next + beta);
}

} // namespace fusetrack
