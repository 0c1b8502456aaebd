// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "../core.hpp"

#include <algorithm>
#include <cmath>

namespace mmw::tracksim {

inline constexpr double pitch_limit_deg = 90.0;

// Pan-tilt head driven by two continuous-rotation servos. Yaw is relative to
// the platform heading, pitch to the (level) platform.
struct ServoState {
    double yaw = 0.0;
    double pitch = 0.0;
    double commanded_rate_yaw = 0.0;
    double commanded_rate_pitch = 0.0;
    double max_rate = 300.0;        // deg/s
    double control_period = 0.02;   // s
};

struct ImuModel {
    double angle_noise_sigma = 0.4;  // deg
    double report_period = 0.02;     // s
    double latency = 0.0;            // s
};

struct ControllerConfig {
    double gain = 30.0;     // 1/s
    double deadband = 0.5;  // deg
};

inline ServoState servo_step(ServoState s, double dt)
{
    if (!(dt > 0.0))
        throw Error(ErrorCode::InvalidInput, "servo_step needs dt > 0");
    s.commanded_rate_yaw = std::clamp(s.commanded_rate_yaw, -s.max_rate, s.max_rate);
    s.commanded_rate_pitch = std::clamp(s.commanded_rate_pitch, -s.max_rate, s.max_rate);
    s.yaw = wrap_180(s.yaw + s.commanded_rate_yaw * dt);
    s.pitch = std::clamp(s.pitch + s.commanded_rate_pitch * dt, -pitch_limit_deg, pitch_limit_deg);
    return s;
}

// Proportional rate command on the wrapped error, zero inside the deadband.
inline double controller_step(double measured_deg, double target_deg, const ControllerConfig& cfg, double max_rate)
{
    const double err = wrap_180(target_deg - measured_deg);
    if (std::abs(err) < cfg.deadband)
        return 0.0;
    return std::clamp(cfg.gain * err, -max_rate, max_rate);
}

// Angle between two (azimuth, elevation) directions, degrees.
inline double angular_separation(double az1, double el1, double az2, double el2)
{
    const double a1 = deg2rad(az1), e1 = deg2rad(el1), a2 = deg2rad(az2), e2 = deg2rad(el2);
    const double x1 = std::cos(e1) * std::sin(a1), y1 = std::cos(e1) * std::cos(a1), z1 = std::sin(e1);
    const double x2 = std::cos(e2) * std::sin(a2), y2 = std::cos(e2) * std::cos(a2), z2 = std::sin(e2);
    const double cx = y1 * z2 - z1 * y2, cy = z1 * x2 - x1 * z2, cz = x1 * y2 - y1 * x2;
    return rad2deg(std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), x1 * x2 + y1 * y2 + z1 * z2));
}

} // namespace mmw::tracksim
