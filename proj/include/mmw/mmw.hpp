// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "antenna.hpp"
#include "consistency.hpp"
#include "core.hpp"
#include "csv.hpp"
#include "fir.hpp"
#include "geo.hpp"
#include "nmea.hpp"
#include "pathloss.hpp"
#include "pipeline.hpp"
#include "sage.hpp"
#include "sounder.hpp"
#include "tracksim/bus.hpp"
#include "tracksim/events.hpp"
#include "tracksim/kinematics.hpp"
#include "tracksim/scenario.hpp"

namespace mmw {
inline constexpr const char* version = "1.0.0";
}
