// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "../core.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace mmw::tracksim {

enum class EventKind { Register, Publish, Deliver, Drop, Actuation, Hold, Alignment };

inline const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::Register: return "register";
    case EventKind::Publish: return "publish";
    case EventKind::Deliver: return "deliver";
    case EventKind::Drop: return "drop";
    case EventKind::Actuation: return "actuation";
    case EventKind::Hold: return "hold";
    case EventKind::Alignment: return "alignment";
    }
    return "?";
}

inline EventKind kind_from_string(const std::string& s)
{
    for (auto k : {EventKind::Register, EventKind::Publish, EventKind::Deliver, EventKind::Drop, EventKind::Actuation,
                   EventKind::Hold, EventKind::Alignment})
        if (s == to_string(k))
            return k;
    throw Error(ErrorCode::MalformedField, "unknown event kind '" + s + "'");
}

// One log record. `t_ns` is simulation time (the log is ordered by it);
// `local_t_ns` is the emitting node's clock, which metrics use, as a real
// deployment would only see node-stamped times.
struct Event {
    std::int64_t t_ns = 0;
    std::string node;
    EventKind kind = EventKind::Register;
    std::int64_t local_t_ns = 0;
    std::string topic;           // register, publish, deliver, drop
    std::uint64_t msg_id = 0;    // publish, deliver, drop
    bool duplicate = false;      // deliver
    double yaw_rate = 0.0;       // actuation
    double pitch_rate = 0.0;     // actuation
    double error_deg = 0.0;      // alignment

    bool operator==(const Event&) const = default;
};

using EventLog = std::vector<Event>;

inline nlohmann::ordered_json to_json(const Event& e)
{
    nlohmann::ordered_json p;
    p["local_t_ns"] = e.local_t_ns;
    switch (e.kind) {
    case EventKind::Register:
        p["topic"] = e.topic;
        break;
    case EventKind::Publish:
    case EventKind::Drop:
        p["topic"] = e.topic;
        p["msg_id"] = e.msg_id;
        break;
    case EventKind::Deliver:
        p["topic"] = e.topic;
        p["msg_id"] = e.msg_id;
        p["duplicate"] = e.duplicate;
        break;
    case EventKind::Actuation:
        p["yaw_rate_dps"] = e.yaw_rate;
        p["pitch_rate_dps"] = e.pitch_rate;
        break;
    case EventKind::Hold:
        break;
    case EventKind::Alignment:
        p["error_deg"] = e.error_deg;
        break;
    }
    nlohmann::ordered_json j;
    j["t_ns"] = e.t_ns;
    j["node"] = e.node;
    j["kind"] = to_string(e.kind);
    j["payload"] = std::move(p);
    return j;
}

inline Event event_from_json(const nlohmann::json& j)
{
    try {
        Event e;
        e.t_ns = j.at("t_ns").get<std::int64_t>();
        e.node = j.at("node").get<std::string>();
        e.kind = kind_from_string(j.at("kind").get<std::string>());
        const auto& p = j.at("payload");
        e.local_t_ns = p.value("local_t_ns", e.t_ns);
        e.topic = p.value("topic", std::string{});
        e.msg_id = p.value("msg_id", std::uint64_t{0});
        e.duplicate = p.value("duplicate", false);
        e.yaw_rate = p.value("yaw_rate_dps", 0.0);
        e.pitch_rate = p.value("pitch_rate_dps", 0.0);
        e.error_deg = p.value("error_deg", 0.0);
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::MalformedField, std::string("event record: ") + ex.what());
    }
}

inline void write_log(std::ostream& out, const EventLog& log)
{
    for (const auto& e : log)
        out << to_json(e).dump() << '\n';
}

inline EventLog read_log(std::istream& in)
{
    EventLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::MalformedField, std::string("event log line: ") + ex.what());
        }
        log.push_back(event_from_json(j));
    }
    return log;
}

// ---- metrics ----------------------------------------------------------------

struct Metrics {
    std::size_t interactions = 0;       // delivery paired with a first actuation
    std::size_t unactuated = 0;         // delivery superseded before any actuation
    std::size_t dropped = 0;
    std::size_t duplicates = 0;
    double mean_response_s = 0.0;
    double p50_response_s = 0.0;
    double p95_response_s = 0.0;
    std::size_t settled = 0;
    double mean_settling_s = 0.0;
    std::size_t alignment_samples = 0;
    double mean_alignment_error_deg = 0.0;
    double p50_alignment_error_deg = 0.0;
    double p95_alignment_error_deg = 0.0;
    double max_alignment_error_deg = 0.0;
};

namespace detail {

// Nearest-rank percentile of an unsorted sample.
inline double percentile(std::vector<double> v, double q)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

inline double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace detail

// Response time: for each first delivery of a message at a subscriber, the
// subscriber's next actuation (before its next delivery) minus the publish
// time. Settling time: from the same publish to the next hold after that
// actuation. Times use node-local clocks.
inline Metrics compute_metrics(const EventLog& log)
{
    struct Pub {
        std::int64_t local_t_ns;
    };
    std::map<std::uint64_t, Pub> published;
    for (const auto& e : log)
        if (e.kind == EventKind::Publish)
            published[e.msg_id] = {e.local_t_ns};

    struct NodeState {
        std::optional<std::int64_t> pending;     // publish time of the awaiting message
        std::optional<std::int64_t> settling;    // publish time awaiting a hold
        std::set<std::uint64_t> seen;
    };
    std::map<std::string, NodeState> nodes;
    std::vector<double> response, settling, align;
    Metrics m;
    for (const auto& e : log) {
        auto& n = nodes[e.node];
        switch (e.kind) {
        case EventKind::Deliver: {
            const auto it = published.find(e.msg_id);
            if (it == published.end())
                throw Error(ErrorCode::UnmatchedEvents, "delivery of unpublished message " + std::to_string(e.msg_id));
            if (!n.seen.insert(e.msg_id).second) {
                ++m.duplicates;
                break;
            }
            if (n.pending)
                ++m.unactuated;
            n.pending = it->second.local_t_ns;
            break;
        }
        case EventKind::Drop:
            if (!published.count(e.msg_id))
                throw Error(ErrorCode::UnmatchedEvents, "drop of unpublished message " + std::to_string(e.msg_id));
            ++m.dropped;
            break;
        case EventKind::Actuation:
            if (n.pending) {
                response.push_back(static_cast<double>(e.local_t_ns - *n.pending) * 1e-9);
                n.settling = n.pending;
                n.pending.reset();
            }
            break;
        case EventKind::Hold:
            if (n.settling) {
                settling.push_back(static_cast<double>(e.local_t_ns - *n.settling) * 1e-9);
                n.settling.reset();
            }
            break;
        case EventKind::Alignment:
            align.push_back(e.error_deg);
            break;
        default:
            break;
        }
    }
    for (const auto& [name, n] : nodes)
        if (n.pending)
            ++m.unactuated;
    m.interactions = response.size();
    m.mean_response_s = detail::mean(response);
    m.p50_response_s = detail::percentile(response, 0.5);
    m.p95_response_s = detail::percentile(response, 0.95);
    m.settled = settling.size();
    m.mean_settling_s = detail::mean(settling);
    m.alignment_samples = align.size();
    m.mean_alignment_error_deg = detail::mean(align);
    m.p50_alignment_error_deg = detail::percentile(align, 0.5);
    m.p95_alignment_error_deg = detail::percentile(align, 0.95);
    m.max_alignment_error_deg = align.empty() ? 0.0 : *std::max_element(align.begin(), align.end());
    return m;
}

inline nlohmann::ordered_json to_json(const Metrics& m)
{
    return {{"interactions", m.interactions},
            {"unactuated", m.unactuated},
            {"dropped", m.dropped},
            {"duplicates", m.duplicates},
            {"mean_response_s", m.mean_response_s},
            {"p50_response_s", m.p50_response_s},
            {"p95_response_s", m.p95_response_s},
            {"settled", m.settled},
            {"mean_settling_s", m.mean_settling_s},
            {"alignment_samples", m.alignment_samples},
            {"mean_alignment_error_deg", m.mean_alignment_error_deg},
            {"p50_alignment_error_deg", m.p50_alignment_error_deg},
            {"p95_alignment_error_deg", m.p95_alignment_error_deg},
            {"max_alignment_error_deg", m.max_alignment_error_deg}};
}

} // namespace mmw::tracksim
