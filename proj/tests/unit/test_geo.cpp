// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#include <catch_amalgamated.hpp>

#include <mmw/geo.hpp>

#include <random>
#include <sstream>

using namespace mmw;
using namespace mmw::geo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GeoFix at(double lat, double lon, double alt = 0.0)
{
    GeoFix f;
    f.latitude = lat;
    f.longitude = lon;
    f.altitude = alt;
    return f;
}

} // namespace

TEST_CASE("geodetic_to_ecef maps symmetric points onto the axes", "[geo]")
{
    const auto eq = geodetic_to_ecef(at(0, 0));
    CHECK(eq.x == 6378137.0);
    CHECK(eq.y == 0.0);
    CHECK(eq.z == 0.0);

    const auto pole = geodetic_to_ecef(at(90, 0));
    CHECK_THAT(pole.x, WithinAbs(0.0, 1e-9));
    CHECK_THAT(pole.y, WithinAbs(0.0, 1e-9));
    CHECK_THAT(pole.z, WithinAbs(6378137.0 * (1.0 - 1.0 / 298.257223563), 1e-6));
    CHECK_THAT(wgs84_b, WithinAbs(6356752.314245179, 1e-6));
}

TEST_CASE("geodetic_to_ecef at the campus site matches a closed-form reference", "[geo]")
{
    // Reference evaluated independently with extended precision.
    const auto p = geodetic_to_ecef(at(40.767, -111.845, 1400.0));
    CHECK_THAT(p.x, WithinAbs(-1800423.524250212, 1e-6));
    CHECK_THAT(p.y, WithinAbs(-4491146.911312214, 1e-6));
    CHECK_THAT(p.z, WithinAbs(4143774.7789491657, 1e-6));
}

TEST_CASE("ecef_to_enu local frame examples", "[geo]")
{
    const GeoFix ref = at(0, 0);
    const auto zero = ecef_to_enu(ref, geodetic_to_ecef(ref));
    CHECK(zero.norm() == 0.0);

    const auto north = ecef_to_enu(ref, geodetic_to_ecef(at(0.001, 0)));
    CHECK_THAT(north.north, WithinAbs(110.574276, 1e-3));
    CHECK(std::abs(north.east) < 1e-3);
    CHECK(std::abs(north.up) < 1e-2);

    const GeoFix site = at(40.767, -111.845, 1400.0);
    const auto up = ecef_to_enu(site, geodetic_to_ecef(at(40.767, -111.845, 1410.0)));
    CHECK_THAT(up.east, WithinAbs(0.0, 1e-6));
    CHECK_THAT(up.north, WithinAbs(0.0, 1e-6));
    CHECK_THAT(up.up, WithinAbs(10.0, 1e-6));
}

TEST_CASE("enu_to_ecef inverts ecef_to_enu", "[geo]")
{
    const GeoFix site = at(40.767, -111.845, 1400.0);
    const EnuVector v{123.4, -56.7, 8.9};
    const auto back = ecef_to_enu(site, enu_to_ecef(site, v));
    CHECK_THAT(back.east, WithinAbs(v.east, 1e-7));
    CHECK_THAT(back.north, WithinAbs(v.north, 1e-7));
    CHECK_THAT(back.up, WithinAbs(v.up, 1e-7));
}

TEST_CASE("distance examples", "[geo]")
{
    const GeoFix a = at(0, 0);
    const auto same = distance(a, a);
    CHECK(same.d2d == 0.0);
    CHECK(same.d3d == 0.0);

    const auto lat = distance(a, at(0.001, 0));
    CHECK_THAT(lat.d2d, WithinAbs(110.574, 1e-3));
    CHECK_THAT(lat.d3d, WithinAbs(lat.d2d, 1e-3));

    const GeoFix site = at(40.767, -111.845, 1400.0);
    const GeoFix peer = offset_fix(site, {0.0, 100.0, 25.0});
    const auto s = distance(site, peer);
    CHECK_THAT(s.d3d, WithinAbs(std::sqrt(100.0 * 100.0 + 25.0 * 25.0), 1e-6));
    CHECK_THAT(s.d2d, WithinAbs(100.0, 1e-3));
}

TEST_CASE("pointing_to examples", "[geo]")
{
    const GeoFix site = at(40.767, -111.845, 1400.0);
    const GeoFix north = offset_fix(site, {0.0, 100.0, 0.0});
    const auto p = pointing_to(site, north);
    CHECK_THAT(wrap_180(p.azimuth), WithinAbs(0.0, 1e-6));
    CHECK_THAT(p.elevation, WithinAbs(0.0, 1e-6));
    CHECK_THAT(p.yaw_relative, WithinAbs(0.0, 1e-6));

    const auto up = pointing_to(site, offset_fix(site, {0.0, 100.0, 25.0}));
    CHECK_THAT(up.elevation, WithinAbs(14.036243467926479, 1e-6));

    GeoFix facing_east = site;
    facing_east.heading = 90.0;
    CHECK_THAT(pointing_to(facing_east, north).yaw_relative, WithinAbs(-90.0, 1e-6));
    CHECK_THAT(pointing_to(site, north, 270.0).yaw_relative, WithinAbs(90.0, 1e-6));

    try {
        (void)pointing_to(site, site);
        FAIL("expected DegenerateGeometry");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateGeometry);
    }
}

TEST_CASE("apply_rtk_noise examples", "[geo]")
{
    const GeoFix site = at(40.767, -111.845, 1400.0);
    CHECK(apply_rtk_noise(site, RtkNoiseConfig{0.0}, 1) == site);
    CHECK(apply_rtk_noise(site, RtkNoiseConfig{}, 42) == apply_rtk_noise(site, RtkNoiseConfig{}, 42));
    CHECK_FALSE(apply_rtk_noise(site, RtkNoiseConfig{}, 42) == apply_rtk_noise(site, RtkNoiseConfig{}, 43));
    CHECK_THROWS_AS(apply_rtk_noise(site, RtkNoiseConfig{-1.0}, 1), Error);

    // Mean of a chi(3) variable scaled by sigma: sigma * 2 * sqrt(2/pi) = 0.169949 m.
    std::mt19937_64 rng(2024);
    double sum = 0.0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i)
        sum += distance(site, apply_rtk_noise(site, RtkNoiseConfig{}, rng)).d3d;
    CHECK_THAT(sum / draws, WithinAbs(0.169949, 0.005));
}

TEST_CASE("round trip geodetic -> ECEF -> geodetic", "[geo][property]")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 179.999), alt(-500.0, 9000.0);
    for (int i = 0; i < 20000; ++i) {
        const GeoFix f = at(lat(rng), lon(rng), alt(rng));
        const GeoFix g = ecef_to_geodetic(geodetic_to_ecef(f));
        REQUIRE_THAT(g.latitude, WithinAbs(f.latitude, 1e-9));
        REQUIRE_THAT(wrap_180(g.longitude - f.longitude), WithinAbs(0.0, 1e-9));
        REQUIRE_THAT(g.altitude, WithinAbs(f.altitude, 1e-6));
    }
}

TEST_CASE("distance is symmetric and obeys the triangle inequality", "[geo][property]")
{
    std::mt19937_64 rng(12);
    const GeoFix site = at(40.767, -111.845, 1400.0);
    std::uniform_real_distribution<double> h(-3000.0, 3000.0), v(-50.0, 50.0);
    for (int i = 0; i < 5000; ++i) {
        const GeoFix a = offset_fix(site, {h(rng), h(rng), v(rng)});
        const GeoFix b = offset_fix(site, {h(rng), h(rng), v(rng)});
        const GeoFix c = offset_fix(site, {h(rng), h(rng), v(rng)});
        const auto ab = distance(a, b), ba = distance(b, a);
        REQUIRE(ab.d2d == ba.d2d);
        REQUIRE(ab.d3d == ba.d3d);
        REQUIRE(ab.d3d >= ab.d2d);
        REQUIRE(ab.d3d <= distance(a, c).d3d + distance(c, b).d3d + 1e-9);
    }
}

TEST_CASE("azimuth reciprocity within one kilometre at the deployment latitude", "[geo][property]")
{
    // The defect grows as east_offset * tan(lat) / R, so the bound is tied to
    // latitude; around 40.8 N it holds out to about 1.29 km.
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dir(0.0, 360.0), range(1.0, 1000.0), dz(-30.0, 30.0);
    std::uniform_real_distribution<double> lat(40.70, 40.80), lon(-180.0, 179.0);
    for (int i = 0; i < 10000; ++i) {
        const GeoFix a = at(lat(rng), lon(rng), 1400.0);
        const double az = deg2rad(dir(rng)), r = range(rng);
        const GeoFix b = offset_fix(a, {r * std::sin(az), r * std::cos(az), dz(rng)});
        const double fwd = pointing_to(a, b).azimuth, back = pointing_to(b, a).azimuth;
        REQUIRE(std::abs(wrap_180(back - fwd - 180.0)) < 0.01);
    }
}

TEST_CASE("reciprocity defect over long east-west baselines is meridian convergence", "[geo]")
{
    // Local north rotates with longitude by dlon * sin(lat); at 10 km this
    // exceeds 0.01 degrees away from the equator.
    const GeoFix a = at(40.767, -111.845, 1400.0);
    const GeoFix b = offset_fix(a, {10000.0, 0.0, 0.0});
    const double defect = wrap_180(pointing_to(b, a).azimuth - pointing_to(a, b).azimuth - 180.0);
    const double convergence = (b.longitude - a.longitude) * std::sin(deg2rad(0.5 * (a.latitude + b.latitude)));
    CHECK_THAT(std::abs(defect), WithinRel(std::abs(convergence), 0.02));
    CHECK(std::abs(defect) > 0.01);
}

TEST_CASE("validate rejects out-of-range fixes", "[geo]")
{
    CHECK_THROWS_AS(validate(at(91, 0)), Error);
    CHECK_THROWS_AS(validate(at(0, 180)), Error);
    GeoFix h = at(0, 0);
    h.heading = 360.0;
    CHECK_THROWS_AS(validate(h), Error);
    GeoFix s = at(0, 0);
    s.speed = -1.0;
    CHECK_THROWS_AS(validate(s), Error);
}

TEST_CASE("track CSV round trip and time lookup", "[geo]")
{
    std::vector<GeoFix> track;
    for (int i = 0; i < 5; ++i) {
        GeoFix f = at(40.767 + 1e-5 * i, -111.845, 1400.0);
        f.fix_time = 1'000'000'000LL * i;
        f.speed = 1.5;
        f.heading = 12.5;
        track.push_back(f);
    }
    std::stringstream ss;
    write_track(ss, track);
    const auto back = read_track(ss);
    REQUIRE(back.size() == track.size());
    for (std::size_t i = 0; i < track.size(); ++i) {
        CHECK(back[i].fix_time == track[i].fix_time);
        CHECK_THAT(back[i].latitude, WithinAbs(track[i].latitude, 1e-12));
    }
    CHECK(nearest_fix(track, 1'400'000'000LL, 500'000'000LL) == std::optional<std::size_t>{1});
    CHECK(nearest_fix(track, 1'600'000'000LL, 500'000'000LL) == std::optional<std::size_t>{2});
    CHECK_FALSE(nearest_fix(track, 9'000'000'000LL, 500'000'000LL).has_value());

    std::stringstream bad("time_ns,lat_deg,lon_deg,alt_m,speed_mps,accel_mps2,heading_deg,acc3d_m\n"
                          "5,0,0,0,0,0,0,0\n5,0,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(read_track(bad), Error);
}
