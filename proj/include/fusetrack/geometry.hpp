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

#ifndef FUSETRACK_GEOMETRY_HPP
#define FUSETRACK_GEOMETRY_HPP

#include <cmath>

// Analytic geometry of the single-link reflection model.
//
// All operations below work in the canonical frame: Tx at (0, 0), Rx at (d_LoS, 0).
// Scene normalizes arbitrary device placements into that frame and keeps the rigid
// transform so results can be mapped back to world coordinates.

namespace fusetrack
{

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

struct Point2
{
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point2 a, Point2 b) = default;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct Rect
{
    double xmin = 0.0;
    double xmax = 0.0;
    double ymin = 0.0;
    double ymax = 0.0;

    bool contains(Point2 p, double tol = 1e-9) const
    {
        return p.x >= xmin - tol && p.x <= xmax + tol && p.y >= ymin - tol && p.y <= ymax + tol;
    }
    Point2 clamp(Point2 p) const;
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

class Scene
{
  public:
    // Throws Errc::DegenerateGeometry when tx == rx and Errc::BadConfig for non-positive
    // carrier frequency or antenna spacing.
    Scene(Point2 tx_world, Point2 rx_world, double carrier_hz, double antenna_spacing, Rect area);

    // Default deployment: Tx (0,0), Rx (4,0), 5.32 GHz, half-wavelength ULA, 4 m x 4 m area.
    static Scene default_scene();

    double d_los() const { return d_los_; }
    double carrier_hz() const { return carrier_hz_; }
    double wavelength() const { return kSpeedOfLight / carrier_hz_; }
    double antenna_spacing() const { return antenna_spacing_; }
    const Rect &area() const { return area_; }
    Point2 tx_world() const { return tx_world_; }
    Point2 rx_world() const { return rx_world_; }

    Point2 tx() const { return {0.0, 0.0}; }
    Point2 rx() const { return {d_los_, 0.0}; }

    Point2 to_canonical(Point2 world) const;
    Point2 to_world(Point2 canonical) const;
    double heading_to_canonical(double world_heading) const { return wrap_angle(world_heading - rotation_); }
    double heading_to_world(double canonical_heading) const { return wrap_angle(canonical_heading + rotation_); }

  private:
    Point2 tx_world_;
    Point2 rx_world_;
    double carrier_hz_;
    double antenna_spacing_;
    Rect area_;
    double d_los_;
    double rotation_; // world angle of the Tx->Rx axis
};

struct TargetState
{
    double x = 0.0;
    double y = 0.0;
    double phi = 0.0; // heading, radians in (-pi, pi]

    Point2 pos() const { return {x, y}; }
};

struct EllipseParams
{
    double a = 0.0; // semi-major axis
    double b = 0.0; // semi-minor axis
    double c = 0.0; // focal half-distance
};

struct DeviceAngles
{
    double alpha_t = 0.0; // direction of the target seen from Tx
    double alpha_r = 0.0; // direction of the target seen from Rx
};

// Angles of the reflection point measured at each device, atan2 convention.
DeviceAngles angles_from_position(const Scene &scene, Point2 pos);

// Ratio v_D / v_H of path-length rate to walking speed for heading phi.
double doppler_ratio(double alpha_t, double alpha_r, double phi);

// Tx -> target -> Rx reflected path length.
double path_length(const Scene &scene, Point2 pos);

// Confocal ellipse (foci at the devices) whose points have path length L.
EllipseParams ellipse_from_path_length(double path_len, double d_los);

// (x - d/2)^2 / a^2 + y^2 / b^2 - 1; zero on the ellipse.
double ellipse_equation(const EllipseParams &e, double d_los, Point2 pos);

TargetState propagate(const TargetState &state, double distance);

// Departure angle at time t recovered from the angle at t+1 plus the signed angle
// between the two positions as seen from Tx. Equals atan2(y_t, x_t).
double departure_angle_recursion(Point2 pos_t, Point2 pos_t1);

} // namespace fusetrack

#endif
