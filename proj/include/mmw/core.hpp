// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mmw {

// Shared physical and geodetic constants.
inline constexpr double speed_of_light = 299792458.0;   // m/s
inline constexpr double wgs84_a = 6378137.0;             // semi-major axis, m
inline constexpr double wgs84_f = 1.0 / 298.257223563;   // flattening
inline constexpr double wgs84_b = wgs84_a * (1.0 - wgs84_f);
inline constexpr double wgs84_e2 = wgs84_f * (2.0 - wgs84_f);
inline constexpr double pi = std::numbers::pi;

enum class ErrorCode {
    ChecksumMismatch,
    UnsupportedSentenceType,
    MalformedField,
    DegenerateGeometry,
    InvalidInput,
    NonMonotonicAngles,
    EmptyCut,
    NoCrossingFound,
    TruncatedFile,
    MetadataMismatch,
    InvalidCutoff,
    EvenTaps,
    WindowOutOfRange,
    InsufficientPoints,
    UnknownGainSetting,
    NoPeaksDetected,
    InsufficientSamples,
    ComponentOutOfGrid,
    DegenerateVector,
    ConfigInvalid,
    UnmatchedEvents,
    NoTemporalOverlap,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::UnsupportedSentenceType: return "UnsupportedSentenceType";
    case ErrorCode::MalformedField: return "MalformedField";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NonMonotonicAngles: return "NonMonotonicAngles";
    case ErrorCode::EmptyCut: return "EmptyCut";
    case ErrorCode::NoCrossingFound: return "NoCrossingFound";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::MetadataMismatch: return "MetadataMismatch";
    case ErrorCode::InvalidCutoff: return "InvalidCutoff";
    case ErrorCode::EvenTaps: return "EvenTaps";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::UnknownGainSetting: return "UnknownGainSetting";
    case ErrorCode::NoPeaksDetected: return "NoPeaksDetected";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::ComponentOutOfGrid: return "ComponentOutOfGrid";
    case ErrorCode::DegenerateVector: return "DegenerateVector";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::UnmatchedEvents: return "UnmatchedEvents";
    case ErrorCode::NoTemporalOverlap: return "NoTemporalOverlap";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

// All library failures are reported through this exception; code() carries
// the machine-readable reason.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

constexpr double deg2rad(double deg) { return deg * (pi / 180.0); }
constexpr double rad2deg(double rad) { return rad * (180.0 / pi); }

// Wrap to [0, 360).
inline double wrap_360(double deg)
{
    double w = std::fmod(deg, 360.0);
    if (w < 0.0)
        w += 360.0;
    if (w >= 360.0)
        w = 0.0;
    return w;
}

// Wrap to (-180, 180].
inline double wrap_180(double deg)
{
    double w = std::fmod(deg, 360.0);
    if (w <= -180.0)
        w += 360.0;
    else if (w > 180.0)
        w -= 360.0;
    return w;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

} // namespace mmw
