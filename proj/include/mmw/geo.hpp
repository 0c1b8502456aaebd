// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "core.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

namespace mmw::geo {

// One geo-positioning sample. Angles in degrees, heading clockwise from true
// north, fix_time in nanoseconds since the epoch.
struct GeoFix {
    double latitude = 0.0;
    double longitude = 0.0;
    double altitude = 0.0;      // ellipsoidal, m
    double speed = 0.0;         // horizontal, m/s
    double acceleration = 0.0;  // horizontal, m/s^2
    double heading = 0.0;
    std::int64_t fix_time = 0;
    double accuracy_3d = 0.0;   // m

    bool operator==(const GeoFix&) const = default;
};

struct EcefPoint {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct EnuVector {
    double east = 0.0, north = 0.0, up = 0.0;

    double horizontal_norm() const { return std::hypot(east, north); }
    double norm() const { return std::sqrt(east * east + north * north + up * up); }
};

struct PointingAngles {
    double azimuth = 0.0;         // [0, 360)
    double elevation = 0.0;       // [-90, 90]
    double yaw_relative = 0.0;    // (-180, 180], relative to own heading
    double pitch_relative = 0.0;  // [-90, 90], platform assumed level
};

struct Separation {
    double d2d = 0.0;
    double d3d = 0.0;
};

inline void validate(const GeoFix& fix)
{
    if (!(fix.latitude >= -90.0 && fix.latitude <= 90.0))
        throw Error(ErrorCode::InvalidInput, "latitude out of [-90, 90]");
    if (!(fix.longitude >= -180.0 && fix.longitude < 180.0))
        throw Error(ErrorCode::InvalidInput, "longitude out of [-180, 180)");
    if (!(fix.heading >= 0.0 && fix.heading < 360.0))
        throw Error(ErrorCode::InvalidInput, "heading out of [0, 360)");
    if (!(fix.speed >= 0.0) || !(fix.accuracy_3d >= 0.0) || !std::isfinite(fix.altitude))
        throw Error(ErrorCode::InvalidInput, "speed/accuracy must be >= 0 and altitude finite");
}

inline EcefPoint geodetic_to_ecef(const GeoFix& fix)
{
    validate(fix);
    const double lat = deg2rad(fix.latitude);
    const double lon = deg2rad(fix.longitude);
    const double sin_lat = std::sin(lat);
    const double n = wgs84_a / std::sqrt(1.0 - wgs84_e2 * sin_lat * sin_lat);
    return {(n + fix.altitude) * std::cos(lat) * std::cos(lon),
            (n + fix.altitude) * std::cos(lat) * std::sin(lon),
            (n * (1.0 - wgs84_e2) + fix.altitude) * sin_lat};
}

// Inverse transform; only latitude, longitude and altitude of the result are
// meaningful.
inline GeoFix ecef_to_geodetic(const EcefPoint& p)
{
    const double rho = std::hypot(p.x, p.y);
    double lat = std::atan2(p.z, rho * (1.0 - wgs84_e2));
    for (int iter = 0; iter < 8; ++iter) {
        const double s = std::sin(lat);
        const double n = wgs84_a / std::sqrt(1.0 - wgs84_e2 * s * s);
        lat = std::atan2(p.z + wgs84_e2 * n * s, rho);
    }
    const double s = std::sin(lat);
    const double c = std::cos(lat);
    GeoFix out;
    out.latitude = rad2deg(lat);
    double lon = rad2deg(std::atan2(p.y, p.x));
    out.longitude = lon >= 180.0 ? lon - 360.0 : lon;
    out.altitude = rho * c + p.z * s - wgs84_a * std::sqrt(1.0 - wgs84_e2 * s * s);
    return out;
}

inline EnuVector ecef_to_enu(const GeoFix& reference, const EcefPoint& target)
{
    const EcefPoint r = geodetic_to_ecef(reference);
    const double dx = target.x - r.x, dy = target.y - r.y, dz = target.z - r.z;
    const double lat = deg2rad(reference.latitude), lon = deg2rad(reference.longitude);
    const double sl = std::sin(lat), cl = std::cos(lat), so = std::sin(lon), co = std::cos(lon);
    return {-so * dx + co * dy, -sl * co * dx - sl * so * dy + cl * dz, cl * co * dx + cl * so * dy + sl * dz};
}

inline EcefPoint enu_to_ecef(const GeoFix& reference, const EnuVector& v)
{
    const EcefPoint r = geodetic_to_ecef(reference);
    const double lat = deg2rad(reference.latitude), lon = deg2rad(reference.longitude);
    const double sl = std::sin(lat), cl = std::cos(lat), so = std::sin(lon), co = std::cos(lon);
    return {r.x - so * v.east - sl * co * v.north + cl * co * v.up,
            r.y + co * v.east - sl * so * v.north + cl * so * v.up,
            r.z + cl * v.north + sl * v.up};
}

// Flat-frame separation. d3d is the straight-line (ENU) norm; d2d removes the
// component along the mean local vertical of the two fixes, which keeps
// distance(a, b) == distance(b, a) bit for bit.
inline Separation distance(const GeoFix& a, const GeoFix& b)
{
    const EcefPoint pa = geodetic_to_ecef(a);
    const EcefPoint pb = geodetic_to_ecef(b);
    const double dx = pb.x - pa.x, dy = pb.y - pa.y, dz = pb.z - pa.z;
    const double d3 = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double lat = deg2rad(0.5 * (a.latitude + b.latitude));
    const double lon_a = deg2rad(a.longitude), lon_b = deg2rad(b.longitude);
    const double ux = std::cos(lat) * 0.5 * (std::cos(lon_a) + std::cos(lon_b));
    const double uy = std::cos(lat) * 0.5 * (std::sin(lon_a) + std::sin(lon_b));
    const double uz = std::sin(lat);
    const double un = std::sqrt(ux * ux + uy * uy + uz * uz);
    const double up = std::abs(dx * ux + dy * uy + dz * uz) / un;
    const double d2 = std::sqrt(std::max(0.0, d3 * d3 - up * up));
    return {d2, d3};
}

inline PointingAngles pointing_to(const GeoFix& self, const GeoFix& peer, std::optional<double> heading = std::nullopt)
{
    const EnuVector v = ecef_to_enu(self, geodetic_to_ecef(peer));
    const double horiz = v.horizontal_norm();
    if (v.norm() == 0.0)
        throw Error(ErrorCode::DegenerateGeometry, "self and peer coincide");
    PointingAngles out;
    out.azimuth = wrap_360(rad2deg(std::atan2(v.east, v.north)));
    out.elevation = rad2deg(std::atan2(v.up, horiz));
    out.yaw_relative = wrap_180(out.azimuth - heading.value_or(self.heading));
    out.pitch_relative = out.elevation;
    return out;
}

struct RtkNoiseConfig {
    double sigma_per_axis = 0.1065;  // m, per ENU axis
};

// Zero-mean Gaussian position noise per ENU axis. The engine is caller state.
template <class Engine>
GeoFix apply_rtk_noise(const GeoFix& fix, const RtkNoiseConfig& cfg, Engine& rng)
{
    if (!(cfg.sigma_per_axis >= 0.0))
        throw Error(ErrorCode::InvalidInput, "sigma_per_axis must be >= 0");
    if (cfg.sigma_per_axis == 0.0)
        return fix;
    std::normal_distribution<double> n(0.0, cfg.sigma_per_axis);
    EnuVector off;
    off.east = n(rng);
    off.north = n(rng);
    off.up = n(rng);
    GeoFix pos = ecef_to_geodetic(enu_to_ecef(fix, off));
    GeoFix out = fix;
    out.latitude = pos.latitude;
    out.longitude = pos.longitude;
    out.altitude = pos.altitude;
    return out;
}

inline GeoFix apply_rtk_noise(const GeoFix& fix, const RtkNoiseConfig& cfg, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return apply_rtk_noise(fix, cfg, rng);
}

// Peer fix displaced by an ENU offset from a reference.
inline GeoFix offset_fix(const GeoFix& reference, const EnuVector& v)
{
    GeoFix pos = ecef_to_geodetic(enu_to_ecef(reference, v));
    GeoFix out = reference;
    out.latitude = pos.latitude;
    out.longitude = pos.longitude;
    out.altitude = pos.altitude;
    return out;
}

// ---- track logs ---------------------------------------------------------

inline constexpr std::string_view track_header = "time_ns,lat_deg,lon_deg,alt_m,speed_mps,accel_mps2,heading_deg,acc3d_m";

inline void validate_track(std::span<const GeoFix> track)
{
    for (std::size_t i = 0; i < track.size(); ++i) {
        validate(track[i]);
        if (i > 0 && track[i].fix_time <= track[i - 1].fix_time)
            throw Error(ErrorCode::InvalidInput, "track fix_time not strictly increasing at row " + std::to_string(i));
    }
}

inline std::vector<GeoFix> read_track(std::istream& in)
{
    const csv::Table t = csv::read(in);
    const std::size_t c_t = t.column("time_ns"), c_lat = t.column("lat_deg"), c_lon = t.column("lon_deg"),
                      c_alt = t.column("alt_m"), c_v = t.column("speed_mps"), c_a = t.column("accel_mps2"),
                      c_h = t.column("heading_deg"), c_acc = t.column("acc3d_m");
    std::vector<GeoFix> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        GeoFix f;
        f.fix_time = csv::to_int(r[c_t]);
        f.latitude = csv::to_double(r[c_lat]);
        f.longitude = csv::to_double(r[c_lon]);
        f.altitude = csv::to_double(r[c_alt]);
        f.speed = csv::to_double(r[c_v]);
        f.acceleration = csv::to_double(r[c_a]);
        f.heading = csv::to_double(r[c_h]);
        f.accuracy_3d = csv::to_double(r[c_acc]);
        out.push_back(f);
    }
    validate_track(out);
    return out;
}

inline std::vector<GeoFix> read_track_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_track(in);
}

inline void write_track(std::ostream& out, std::span<const GeoFix> track)
{
    out << track_header << '\n';
    for (const auto& f : track)
        out << f.fix_time << ',' << csv::fmt(f.latitude) << ',' << csv::fmt(f.longitude) << ',' << csv::fmt(f.altitude)
            << ',' << csv::fmt(f.speed) << ',' << csv::fmt(f.acceleration) << ',' << csv::fmt(f.heading) << ','
            << csv::fmt(f.accuracy_3d) << '\n';
}

// Index of the fix closest in time to t, if within max_skew_ns.
inline std::optional<std::size_t> nearest_fix(std::span<const GeoFix> track, std::int64_t t, std::int64_t max_skew_ns)
{
    if (track.empty())
        return std::nullopt;
    auto it = std::lower_bound(track.begin(), track.end(), t,
                               [](const GeoFix& f, std::int64_t v) { return f.fix_time < v; });
    std::size_t best = track.size();
    std::int64_t best_skew = 0;
    auto consider = [&](std::size_t i) {
        const std::int64_t skew = std::abs(track[i].fix_time - t);
        if (best == track.size() || skew < best_skew) {
            best = i;
            best_skew = skew;
        }
    };
    if (it != track.end())
        consider(static_cast<std::size_t>(it - track.begin()));
    if (it != track.begin())
        consider(static_cast<std::size_t>(it - track.begin()) - 1);
    if (best_skew > max_skew_ns)
        return std::nullopt;
    return best;
}

} // namespace mmw::geo
