// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "core.hpp"
#include "csv.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmw::geo {

enum class SentenceType { GGA, RMC };

// Fields carried by one GGA or RMC sentence. Anything the sentence type does
// not carry, or that the receiver left empty, stays disengaged.
struct NmeaFragment {
    SentenceType type = SentenceType::GGA;
    std::string talker;                       // "GP", "GN", ...
    std::optional<double> latitude;           // deg
    std::optional<double> longitude;          // deg
    std::optional<double> altitude;           // ellipsoidal m (GGA: MSL + geoid separation)
    std::optional<double> speed;              // m/s (RMC)
    std::optional<double> heading;            // deg true (RMC course over ground)
    std::optional<std::int64_t> fix_time;     // ns since epoch (RMC: date + time)
    std::optional<std::int64_t> time_of_day;  // ns since 00:00 UTC
    std::optional<int> fix_quality;           // GGA
    std::optional<bool> valid;                // RMC status A/V
};

inline std::uint8_t nmea_checksum(std::string_view body)
{
    std::uint8_t x = 0;
    for (char c : body)
        x ^= static_cast<std::uint8_t>(c);
    return x;
}

// "$" + body + "*HH"
inline std::string make_sentence(std::string_view body)
{
    char tail[4];
    std::snprintf(tail, sizeof(tail), "*%02X", static_cast<unsigned>(nmea_checksum(body)));
    return "$" + std::string(body) + tail;
}

namespace detail {

inline int hex_digit(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    return -1;
}

inline std::optional<double> opt_number(const std::string& f)
{
    if (f.empty())
        return std::nullopt;
    return csv::to_double(f);
}

// ddmm.mmmm / dddmm.mmmm with hemisphere letter.
inline std::optional<double> coordinate(const std::string& value, const std::string& hemi, bool is_lat)
{
    if (value.empty() && hemi.empty())
        return std::nullopt;
    if (value.empty() || hemi.size() != 1)
        throw Error(ErrorCode::MalformedField, "coordinate without hemisphere");
    const std::size_t deg_digits = is_lat ? 2 : 3;
    const auto dot = value.find('.');
    const std::size_t int_len = dot == std::string::npos ? value.size() : dot;
    if (int_len != deg_digits + 2)
        throw Error(ErrorCode::MalformedField, "bad coordinate '" + value + "'");
    const double deg = csv::to_double(value.substr(0, deg_digits));
    const double minutes = csv::to_double(value.substr(deg_digits));
    if (minutes >= 60.0)
        throw Error(ErrorCode::MalformedField, "minutes >= 60 in '" + value + "'");
    double v = deg + minutes / 60.0;
    const char h = hemi[0];
    if (is_lat ? (h != 'N' && h != 'S') : (h != 'E' && h != 'W'))
        throw Error(ErrorCode::MalformedField, "bad hemisphere '" + hemi + "'");
    if (h == 'S' || h == 'W')
        v = -v;
    if (is_lat ? std::abs(v) > 90.0 : std::abs(v) > 180.0)
        throw Error(ErrorCode::MalformedField, "coordinate out of range '" + value + "'");
    if (!is_lat && v >= 180.0)
        v -= 360.0;
    return v;
}

// hhmmss[.sss] -> ns since midnight
inline std::optional<std::int64_t> time_of_day(const std::string& f)
{
    if (f.empty())
        return std::nullopt;
    if (f.size() < 6)
        throw Error(ErrorCode::MalformedField, "bad time '" + f + "'");
    const long long hh = csv::to_int(f.substr(0, 2));
    const long long mm = csv::to_int(f.substr(2, 2));
    const double ss = csv::to_double(f.substr(4));
    if (hh > 23 || mm > 59 || ss >= 61.0 || ss < 0.0)
        throw Error(ErrorCode::MalformedField, "bad time '" + f + "'");
    return (hh * 3600 + mm * 60) * 1'000'000'000LL + static_cast<std::int64_t>(std::llround(ss * 1e9));
}

// ddmmyy -> ns since epoch at midnight UTC
inline std::optional<std::int64_t> date(const std::string& f)
{
    if (f.empty())
        return std::nullopt;
    if (f.size() != 6)
        throw Error(ErrorCode::MalformedField, "bad date '" + f + "'");
    const int dd = static_cast<int>(csv::to_int(f.substr(0, 2)));
    const int mo = static_cast<int>(csv::to_int(f.substr(2, 2)));
    const int yy = static_cast<int>(csv::to_int(f.substr(4, 2)));
    using namespace std::chrono;
    const year_month_day ymd{year{yy < 80 ? 2000 + yy : 1900 + yy}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(dd)}};
    if (!ymd.ok())
        throw Error(ErrorCode::MalformedField, "bad date '" + f + "'");
    return duration_cast<nanoseconds>(sys_days{ymd}.time_since_epoch()).count();
}

} // namespace detail

inline NmeaFragment parse_nmea(std::string_view line)
{
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
        line.remove_suffix(1);
    if (line.empty() || line.front() != '$')
        throw Error(ErrorCode::MalformedField, "sentence must start with '$'");
    const auto star = line.rfind('*');
    if (star == std::string_view::npos || star + 3 != line.size())
        throw Error(ErrorCode::MalformedField, "sentence must end with '*HH'");
    const int hi = detail::hex_digit(line[star + 1]);
    const int lo = detail::hex_digit(line[star + 2]);
    if (hi < 0 || lo < 0)
        throw Error(ErrorCode::MalformedField, "checksum is not hex");
    const std::string_view body = line.substr(1, star - 1);
    if (nmea_checksum(body) != static_cast<std::uint8_t>(hi * 16 + lo))
        throw Error(ErrorCode::ChecksumMismatch, std::string(line));

    const std::vector<std::string> f = csv::split(body);
    if (f[0].size() != 5)
        throw Error(ErrorCode::MalformedField, "bad address field '" + f[0] + "'");
    const std::string kind = f[0].substr(2);
    NmeaFragment out;
    out.talker = f[0].substr(0, 2);

    if (kind == "GGA") {
        // time, lat, N/S, lon, E/W, quality, sats, hdop, alt, M, geoid sep, M, ...
        if (f.size() < 15)
            throw Error(ErrorCode::MalformedField, "GGA needs 14 fields");
        out.type = SentenceType::GGA;
        out.time_of_day = detail::time_of_day(f[1]);
        out.latitude = detail::coordinate(f[2], f[3], true);
        out.longitude = detail::coordinate(f[4], f[5], false);
        if (!f[6].empty())
            out.fix_quality = static_cast<int>(csv::to_int(f[6]));
        const auto msl = detail::opt_number(f[9]);
        const auto sep = detail::opt_number(f[11]);
        if (msl)
            out.altitude = *msl + sep.value_or(0.0);
        return out;
    }
    if (kind == "RMC") {
        // time, status, lat, N/S, lon, E/W, speed kn, course, date, ...
        if (f.size() < 10)
            throw Error(ErrorCode::MalformedField, "RMC needs 9 fields");
        out.type = SentenceType::RMC;
        out.time_of_day = detail::time_of_day(f[1]);
        if (f[2] == "A" || f[2] == "V")
            out.valid = f[2] == "A";
        else if (!f[2].empty())
            throw Error(ErrorCode::MalformedField, "bad RMC status '" + f[2] + "'");
        out.latitude = detail::coordinate(f[3], f[4], true);
        out.longitude = detail::coordinate(f[5], f[6], false);
        if (auto kn = detail::opt_number(f[7])) {
            if (*kn < 0.0)
                throw Error(ErrorCode::MalformedField, "negative speed");
            out.speed = *kn * (1852.0 / 3600.0);
        }
        if (auto course = detail::opt_number(f[8]))
            out.heading = wrap_360(*course);
        const auto day = detail::date(f[9]);
        if (day && out.time_of_day)
            out.fix_time = *day + *out.time_of_day;
        return out;
    }
    throw Error(ErrorCode::UnsupportedSentenceType, f[0]);
}

} // namespace mmw::geo
