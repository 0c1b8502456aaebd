// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "../core.hpp"
#include "../geo.hpp"
#include "bus.hpp"
#include "events.hpp"
#include "kinematics.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

namespace mmw::tracksim {

// Gently curving drive at constant speed, sampled at a fixed rate. Positions
// are ENU offsets from `origin`; times start at 0.
struct DriveConfig {
    std::size_t num_fixes = 1000;
    double rate_hz = 10.0;
    double speed_mps = 8.0;
    double start_east_m = 120.0;
    double start_north_m = -60.0;
    double heading0_deg = 0.0;
    double swing_deg = 25.0;
    double swing_period_s = 60.0;
};

inline std::vector<geo::GeoFix> synthetic_drive(const DriveConfig& cfg, const geo::GeoFix& origin)
{
    if (cfg.num_fixes < 2 || !(cfg.rate_hz > 0.0) || !(cfg.speed_mps >= 0.0) || !(cfg.swing_period_s > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "invalid drive configuration");
    std::vector<geo::GeoFix> track;
    track.reserve(cfg.num_fixes);
    const double dt = 1.0 / cfg.rate_hz;
    double e = cfg.start_east_m, n = cfg.start_north_m;
    const double w = 2.0 * pi / cfg.swing_period_s;
    for (std::size_t i = 0; i < cfg.num_fixes; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double h = cfg.heading0_deg + cfg.swing_deg * std::sin(w * t);
        geo::GeoFix f = geo::offset_fix(origin, {e, n, 0.0});
        f.heading = wrap_360(h);
        f.speed = cfg.speed_mps;
        f.acceleration = cfg.speed_mps * deg2rad(cfg.swing_deg * w * std::cos(w * t));  // centripetal
        f.fix_time = seconds_to_ns(t);
        f.accuracy_3d = 0.0;
        track.push_back(f);
        // Midpoint heading keeps the sampled heading consistent with the path.
        const double hm = deg2rad(cfg.heading0_deg + cfg.swing_deg * std::sin(w * (t + 0.5 * dt)));
        e += cfg.speed_mps * dt * std::sin(hm);
        n += cfg.speed_mps * dt * std::cos(hm);
    }
    return track;
}

struct NodeConfig {
    double mount_height_m = 0.0;
    double clock_offset_s = 0.0;
};

struct ScenarioConfig {
    geo::GeoFix tx_fix{40.767, -111.845, 1400.0};
    NodeConfig tx{25.0, 0.0};
    double tx_publish_period_s = 0.1;

    std::vector<geo::GeoFix> rx_track;  // empty: synthetic drive
    DriveConfig drive;
    NodeConfig rx{2.0, 0.0};

    ServoState servo;
    ImuModel imu;
    ControllerConfig controller;
    BusConfig bus{{LatencyDistribution::Kind::Lognormal, 0.0, 0.0, 0.0, 0.006, 0.8}, 0.0, 0.0, {}};
    geo::RtkNoiseConfig rtk;
    double heading_noise_deg = 0.1;

    std::optional<double> duration_s;  // default: span of the Rx track
    bool initial_alignment = true;
    bool randomize_control_phase = true;
    std::uint64_t seed = 1;

    void validate() const
    {
        if (!(servo.max_rate > 0.0) || !(servo.control_period > 0.0))
            throw Error(ErrorCode::ConfigInvalid, "servo max_rate and control_period must be > 0");
        if (!(imu.angle_noise_sigma >= 0.0) || !(imu.report_period >= 0.0) || !(imu.latency >= 0.0))
            throw Error(ErrorCode::ConfigInvalid, "IMU parameters must be >= 0");
        if (!(controller.gain > 0.0) || !(controller.deadband >= 0.0))
            throw Error(ErrorCode::ConfigInvalid, "controller gain must be > 0 and deadband >= 0");
        if (!(tx_publish_period_s > 0.0) || !(heading_noise_deg >= 0.0) || !(rtk.sigma_per_axis >= 0.0))
            throw Error(ErrorCode::ConfigInvalid, "publish period must be > 0, noise sigmas >= 0");
        if (duration_s && !(*duration_s > 0.0))
            throw Error(ErrorCode::ConfigInvalid, "duration must be > 0");
        try {
            bus.validate();
            geo::validate(tx_fix);
            if (!rx_track.empty())
                geo::validate_track(rx_track);
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigInvalid, e.what());
        }
    }
};

struct ScenarioResult {
    EventLog log;
    Metrics metrics;
};

namespace detail {

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    std::uint32_t parts[2];
    seq.generate(parts, parts + 2);
    return (static_cast<std::uint64_t>(parts[0]) << 32) | parts[1];
}

// Linear interpolation of a time-ordered track at simulation time t (ns
// after the first fix); held at the ends.
inline geo::GeoFix interpolate(const std::vector<geo::GeoFix>& track, std::int64_t t)
{
    const std::int64_t abs_t = track.front().fix_time + t;
    if (abs_t <= track.front().fix_time)
        return track.front();
    if (abs_t >= track.back().fix_time)
        return track.back();
    const auto it = std::upper_bound(track.begin(), track.end(), abs_t,
                                     [](std::int64_t v, const geo::GeoFix& f) { return v < f.fix_time; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double u = static_cast<double>(abs_t - a.fix_time) / static_cast<double>(b.fix_time - a.fix_time);
    geo::GeoFix f = a;
    f.latitude = a.latitude + u * (b.latitude - a.latitude);
    f.longitude = a.longitude + u * (b.longitude - a.longitude);
    f.altitude = a.altitude + u * (b.altitude - a.altitude);
    f.speed = a.speed + u * (b.speed - a.speed);
    f.heading = wrap_360(a.heading + u * wrap_180(b.heading - a.heading));
    f.fix_time = abs_t;
    return f;
}

struct ImuReport {
    std::int64_t available_ns;
    double yaw, pitch;
};

struct Node {
    std::string name;
    std::string peer;
    std::function<geo::GeoFix(std::int64_t)> truth;  // antenna position and platform heading
    double clock_offset_ns = 0.0;
    ServoState servo;
    std::int64_t servo_time_ns = 0;
    std::optional<geo::GeoFix> own_fix;   // latest own RTK fix
    std::optional<geo::GeoFix> peer_fix;  // latest delivered peer fix
    std::vector<ImuReport> imu;
    bool moving = false;
};

} // namespace detail

class Simulation {
public:
    explicit Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg))
    {
        cfg_.validate();
        if (cfg_.rx_track.empty()) {
            geo::GeoFix ground = cfg_.tx_fix;
            cfg_.rx_track = synthetic_drive(cfg_.drive, ground);
        }
        bus_rng_seed_ = detail::stream_seed(cfg_.seed, 1);
        rtk_rng_.seed(detail::stream_seed(cfg_.seed, 2));
        imu_rng_.seed(detail::stream_seed(cfg_.seed, 3));
        heading_rng_.seed(detail::stream_seed(cfg_.seed, 4));
    }

    ScenarioResult run()
    {
        Bus bus(cfg_.bus, bus_rng_seed_);
        bus_ = &bus;
        const auto& track = cfg_.rx_track;
        const std::int64_t end_ns =
            cfg_.duration_s ? seconds_to_ns(*cfg_.duration_s) : track.back().fix_time - track.front().fix_time;

        geo::GeoFix tx_antenna = cfg_.tx_fix;
        tx_antenna.altitude += cfg_.tx.mount_height_m;
        const double rx_h = cfg_.rx.mount_height_m;
        nodes_.clear();
        nodes_["tx"] = make_node("tx", "rx", [tx_antenna](std::int64_t) { return tx_antenna; }, cfg_.tx);
        nodes_["rx"] = make_node("rx", "tx",
                                 [&track, rx_h](std::int64_t t) {
                                     geo::GeoFix f = detail::interpolate(track, t);
                                     f.altitude += rx_h;
                                     return f;
                                 },
                                 cfg_.rx);
        for (auto& [name, n] : nodes_) {
            bus.subscribe("geo." + n.peer, name);
            log(0, n, EventKind::Register, [&](Event& e) { e.topic = "geo." + n.peer; });
            if (cfg_.initial_alignment) {
                const auto p = geo::pointing_to(n.truth(0), nodes_.at(n.peer).truth(0));
                n.servo.yaw = p.yaw_relative;
                n.servo.pitch = p.pitch_relative;
            }
        }

        // Rx publishes at its track epochs, Tx on a fixed period.
        for (const auto& f : track) {
            const std::int64_t t = f.fix_time - track.front().fix_time;
            if (t > end_ns)
                break;
            schedule(t, [this, t] { publish_fix(nodes_.at("rx"), t); });
        }
        const std::int64_t tx_period = seconds_to_ns(cfg_.tx_publish_period_s);
        for (std::int64_t t = 0; t <= end_ns; t += tx_period)
            schedule(t, [this, t] { publish_fix(nodes_.at("tx"), t); });

        const std::int64_t imu_period = seconds_to_ns(cfg_.imu.report_period);
        if (imu_period > 0)
            for (std::int64_t t = 0; t <= end_ns; t += imu_period)
                for (auto& [name, n] : nodes_)
                    schedule(t, [this, &n, t] { imu_report(n, t); });

        // Control loops free-run against the GPS epochs: each node's first
        // tick falls at a seeded phase within one control period.
        const std::int64_t ctl_period = seconds_to_ns(cfg_.servo.control_period);
        std::mt19937_64 phase_rng(detail::stream_seed(cfg_.seed, 5));
        for (auto& [name, n] : nodes_) {
            const std::int64_t phase = cfg_.randomize_control_phase
                                           ? std::uniform_int_distribution<std::int64_t>(0, ctl_period - 1)(phase_rng)
                                           : 0;
            for (std::int64_t t = phase; t <= end_ns; t += ctl_period)
                schedule(t, [this, &n, t] { control_tick(n, t); });
        }

        while (!queue_.empty()) {
            auto item = queue_.top();
            queue_.pop();
            if (item.t_ns > end_ns)
                continue;
            item.action();
        }
        bus_ = nullptr;
        ScenarioResult res{std::move(log_), {}};
        log_.clear();
        res.metrics = compute_metrics(res.log);
        return res;
    }

private:
    struct Item {
        std::int64_t t_ns;
        std::uint64_t seq;
        std::function<void()> action;
        bool operator>(const Item& o) const { return t_ns != o.t_ns ? t_ns > o.t_ns : seq > o.seq; }
    };

    detail::Node make_node(std::string name, std::string peer, std::function<geo::GeoFix(std::int64_t)> truth,
                           const NodeConfig& nc)
    {
        detail::Node n;
        n.name = std::move(name);
        n.peer = std::move(peer);
        n.truth = std::move(truth);
        n.clock_offset_ns = nc.clock_offset_s * 1e9;
        n.servo = cfg_.servo;
        n.servo.commanded_rate_yaw = n.servo.commanded_rate_pitch = 0.0;
        return n;
    }

    void schedule(std::int64_t t, std::function<void()> fn) { queue_.push({t, seq_++, std::move(fn)}); }

    template <class F>
    void log(std::int64_t t, const detail::Node& n, EventKind kind, F&& fill)
    {
        Event e;
        e.t_ns = t;
        e.node = n.name;
        e.kind = kind;
        e.local_t_ns = t + static_cast<std::int64_t>(std::llround(n.clock_offset_ns));
        fill(e);
        log_.push_back(std::move(e));
    }

    void advance(detail::Node& n, std::int64_t t)
    {
        if (t > n.servo_time_ns) {
            n.servo = servo_step(n.servo, static_cast<double>(t - n.servo_time_ns) * 1e-9);
            n.servo_time_ns = t;
        }
    }

    void publish_fix(detail::Node& n, std::int64_t t)
    {
        const geo::GeoFix fix = geo::apply_rtk_noise(n.truth(t), cfg_.rtk, rtk_rng_);
        n.own_fix = fix;
        const std::uint64_t id = next_msg_++;
        payloads_[id] = fix;
        const std::string topic = "geo." + n.name;
        log(t, n, EventKind::Publish, [&](Event& e) {
            e.topic = topic;
            e.msg_id = id;
        });
        const auto out = bus_->publish(topic, id, t);
        for (const auto& d : out.drops)
            log(t, nodes_.at(d.subscriber), EventKind::Drop, [&](Event& e) {
                e.topic = topic;
                e.msg_id = d.msg_id;
            });
        for (const auto& d : out.deliveries) {
            schedule(d.t_ns, [this, d, topic] {
                auto& sub = nodes_.at(d.subscriber);
                log(d.t_ns, sub, EventKind::Deliver, [&](Event& e) {
                    e.topic = topic;
                    e.msg_id = d.msg_id;
                    e.duplicate = d.duplicate;
                });
                const auto& f = payloads_.at(d.msg_id);
                if (!sub.peer_fix || f.fix_time >= sub.peer_fix->fix_time)
                    sub.peer_fix = f;
            });
        }
    }

    void imu_report(detail::Node& n, std::int64_t t)
    {
        advance(n, t);
        std::normal_distribution<double> nd(0.0, 1.0);
        const double s = cfg_.imu.angle_noise_sigma;
        const double ny = s > 0.0 ? s * nd(imu_rng_) : 0.0;
        const double np = s > 0.0 ? s * nd(imu_rng_) : 0.0;
        n.imu.push_back({t + seconds_to_ns(cfg_.imu.latency), wrap_180(n.servo.yaw + ny), n.servo.pitch + np});
        // Keep only what a later tick could still use.
        std::size_t keep = 0;
        for (std::size_t i = 0; i < n.imu.size(); ++i)
            if (n.imu[i].available_ns <= t)
                keep = i;
        n.imu.erase(n.imu.begin(), n.imu.begin() + static_cast<std::ptrdiff_t>(keep));
    }

    void control_tick(detail::Node& n, std::int64_t t)
    {
        advance(n, t);
        const geo::GeoFix self = n.truth(t);
        const geo::GeoFix peer = nodes_.at(n.peer).truth(t);
        const auto truth = geo::pointing_to(self, peer);
        const double err = angular_separation(self.heading + n.servo.yaw, n.servo.pitch, truth.azimuth, truth.elevation);
        log(t, n, EventKind::Alignment, [&](Event& e) { e.error_deg = err; });

        double rate_yaw = 0.0, rate_pitch = 0.0;
        std::optional<std::pair<double, double>> measured;
        if (cfg_.imu.report_period <= 0.0) {
            std::normal_distribution<double> nd(0.0, 1.0);
            const double s = cfg_.imu.angle_noise_sigma;
            const double ny = s > 0.0 ? s * nd(imu_rng_) : 0.0;
            const double np = s > 0.0 ? s * nd(imu_rng_) : 0.0;
            measured = std::pair{wrap_180(n.servo.yaw + ny), n.servo.pitch + np};
        } else {
            for (const auto& r : n.imu)
                if (r.available_ns <= t)
                    measured = std::pair{r.yaw, r.pitch};
        }
        if (n.peer_fix && n.own_fix && measured) {
            std::normal_distribution<double> nd(0.0, 1.0);
            const double hn = cfg_.heading_noise_deg > 0.0 ? cfg_.heading_noise_deg * nd(heading_rng_) : 0.0;
            const double heading = wrap_360(self.heading + hn);
            geo::GeoFix own = *n.own_fix;
            const auto target = geo::pointing_to(own, *n.peer_fix, heading);
            // The deadband gates on the total pointing error so a hold means
            // the boresight is within it, not merely each axis.
            const double total = angular_separation(measured->first, measured->second, target.yaw_relative,
                                                    target.pitch_relative);
            if (total >= cfg_.controller.deadband) {
                const ControllerConfig drive{cfg_.controller.gain, 0.0};
                rate_yaw = controller_step(measured->first, target.yaw_relative, drive, n.servo.max_rate);
                rate_pitch = controller_step(measured->second, target.pitch_relative, drive, n.servo.max_rate);
            }
        }
        n.servo.commanded_rate_yaw = rate_yaw;
        n.servo.commanded_rate_pitch = rate_pitch;
        const bool moving = rate_yaw != 0.0 || rate_pitch != 0.0;
        if (moving)
            log(t, n, EventKind::Actuation, [&](Event& e) {
                e.yaw_rate = rate_yaw;
                e.pitch_rate = rate_pitch;
            });
        else if (n.moving)
            log(t, n, EventKind::Hold, [](Event&) {});
        n.moving = moving;
    }

    ScenarioConfig cfg_;
    std::uint64_t bus_rng_seed_ = 0;
    std::mt19937_64 rtk_rng_, imu_rng_, heading_rng_;
    Bus* bus_ = nullptr;
    std::map<std::string, detail::Node> nodes_;
    std::map<std::uint64_t, geo::GeoFix> payloads_;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue_;
    std::uint64_t seq_ = 0;
    std::uint64_t next_msg_ = 1;
    EventLog log_;
};

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) { return Simulation(cfg).run(); }

// ---- scenario JSON ------------------------------------------------------------

inline LatencyDistribution latency_from_json(const nlohmann::json& j)
{
    LatencyDistribution d;
    const auto kind = j.value("kind", std::string("fixed"));
    if (kind == "fixed") {
        d.kind = LatencyDistribution::Kind::Fixed;
        d.value_s = j.value("value_s", 0.0);
    } else if (kind == "uniform") {
        d.kind = LatencyDistribution::Kind::Uniform;
        d.low_s = j.value("low_s", 0.0);
        d.high_s = j.value("high_s", 0.0);
    } else if (kind == "lognormal") {
        d.kind = LatencyDistribution::Kind::Lognormal;
        d.mean_s = j.value("mean_s", 0.0);
        d.sigma = j.value("sigma", 0.0);
    } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown latency kind '" + kind + "'");
    }
    return d;
}

inline nlohmann::ordered_json to_json(const LatencyDistribution& d)
{
    switch (d.kind) {
    case LatencyDistribution::Kind::Fixed: return {{"kind", "fixed"}, {"value_s", d.value_s}};
    case LatencyDistribution::Kind::Uniform: return {{"kind", "uniform"}, {"low_s", d.low_s}, {"high_s", d.high_s}};
    case LatencyDistribution::Kind::Lognormal: return {{"kind", "lognormal"}, {"mean_s", d.mean_s}, {"sigma", d.sigma}};
    }
    return {};
}

// Missing keys keep their defaults. Relative track paths resolve against
// `base_dir`.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::string& base_dir = "")
{
    ScenarioConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        if (j.contains("duration_s") && !j["duration_s"].is_null())
            c.duration_s = j["duration_s"].get<double>();
        c.initial_alignment = j.value("initial_alignment", c.initial_alignment);
        c.randomize_control_phase = j.value("randomize_control_phase", c.randomize_control_phase);
        c.heading_noise_deg = j.value("heading_noise_deg", c.heading_noise_deg);
        c.rtk.sigma_per_axis = j.value("rtk_sigma_m", c.rtk.sigma_per_axis);
        if (j.contains("tx")) {
            const auto& t = j["tx"];
            c.tx_fix.latitude = t.value("lat_deg", c.tx_fix.latitude);
            c.tx_fix.longitude = t.value("lon_deg", c.tx_fix.longitude);
            c.tx_fix.altitude = t.value("alt_m", c.tx_fix.altitude);
            c.tx_fix.heading = t.value("heading_deg", c.tx_fix.heading);
            c.tx.mount_height_m = t.value("mount_height_m", c.tx.mount_height_m);
            c.tx.clock_offset_s = t.value("clock_offset_s", c.tx.clock_offset_s);
            c.tx_publish_period_s = t.value("publish_period_s", c.tx_publish_period_s);
        }
        if (j.contains("rx")) {
            const auto& r = j["rx"];
            c.rx.mount_height_m = r.value("mount_height_m", c.rx.mount_height_m);
            c.rx.clock_offset_s = r.value("clock_offset_s", c.rx.clock_offset_s);
            if (r.contains("track_csv")) {
                std::string p = r["track_csv"].get<std::string>();
                if (!base_dir.empty() && !p.empty() && p.front() != '/')
                    p = base_dir + "/" + p;
                c.rx_track = geo::read_track_file(p);
            }
            if (r.contains("drive")) {
                const auto& d = r["drive"];
                c.drive.num_fixes = d.value("num_fixes", c.drive.num_fixes);
                c.drive.rate_hz = d.value("rate_hz", c.drive.rate_hz);
                c.drive.speed_mps = d.value("speed_mps", c.drive.speed_mps);
                c.drive.start_east_m = d.value("start_east_m", c.drive.start_east_m);
                c.drive.start_north_m = d.value("start_north_m", c.drive.start_north_m);
                c.drive.heading0_deg = d.value("heading0_deg", c.drive.heading0_deg);
                c.drive.swing_deg = d.value("swing_deg", c.drive.swing_deg);
                c.drive.swing_period_s = d.value("swing_period_s", c.drive.swing_period_s);
            }
        }
        if (j.contains("servo")) {
            c.servo.max_rate = j["servo"].value("max_rate_dps", c.servo.max_rate);
            c.servo.control_period = j["servo"].value("control_period_s", c.servo.control_period);
        }
        if (j.contains("imu")) {
            c.imu.angle_noise_sigma = j["imu"].value("sigma_deg", c.imu.angle_noise_sigma);
            c.imu.report_period = j["imu"].value("report_period_s", c.imu.report_period);
            c.imu.latency = j["imu"].value("latency_s", c.imu.latency);
        }
        if (j.contains("controller")) {
            c.controller.gain = j["controller"].value("gain_per_s", c.controller.gain);
            c.controller.deadband = j["controller"].value("deadband_deg", c.controller.deadband);
        }
        if (j.contains("bus")) {
            const auto& b = j["bus"];
            if (b.contains("latency"))
                c.bus.latency = latency_from_json(b["latency"]);
            c.bus.drop_probability = b.value("drop_probability", c.bus.drop_probability);
            c.bus.duplicate_probability = b.value("duplicate_probability", c.bus.duplicate_probability);
            if (b.contains("failover_windows")) {
                c.bus.failover_windows.clear();
                for (const auto& w : b["failover_windows"])
                    c.bus.failover_windows.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("scenario JSON: ") + e.what());
    }
    c.validate();
    return c;
}

// Effective configuration (the Rx track itself is summarized by its size).
inline nlohmann::ordered_json to_json(const ScenarioConfig& c)
{
    nlohmann::ordered_json windows = nlohmann::ordered_json::array();
    for (const auto& w : c.bus.failover_windows)
        windows.push_back({w.start_s, w.end_s});
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["duration_s"] = c.duration_s ? nlohmann::ordered_json(*c.duration_s) : nlohmann::ordered_json(nullptr);
    j["initial_alignment"] = c.initial_alignment;
    j["randomize_control_phase"] = c.randomize_control_phase;
    j["heading_noise_deg"] = c.heading_noise_deg;
    j["rtk_sigma_m"] = c.rtk.sigma_per_axis;
    j["tx"] = {{"lat_deg", c.tx_fix.latitude},           {"lon_deg", c.tx_fix.longitude},
               {"alt_m", c.tx_fix.altitude},             {"heading_deg", c.tx_fix.heading},
               {"mount_height_m", c.tx.mount_height_m}, {"clock_offset_s", c.tx.clock_offset_s},
               {"publish_period_s", c.tx_publish_period_s}};
    j["rx"] = {{"mount_height_m", c.rx.mount_height_m},
               {"clock_offset_s", c.rx.clock_offset_s},
               {"track_fixes", c.rx_track.size()},
               {"drive",
                {{"num_fixes", c.drive.num_fixes},
                 {"rate_hz", c.drive.rate_hz},
                 {"speed_mps", c.drive.speed_mps},
                 {"start_east_m", c.drive.start_east_m},
                 {"start_north_m", c.drive.start_north_m},
                 {"heading0_deg", c.drive.heading0_deg},
                 {"swing_deg", c.drive.swing_deg},
                 {"swing_period_s", c.drive.swing_period_s}}}};
    j["servo"] = {{"max_rate_dps", c.servo.max_rate}, {"control_period_s", c.servo.control_period}};
    j["imu"] = {{"sigma_deg", c.imu.angle_noise_sigma},
                {"report_period_s", c.imu.report_period},
                {"latency_s", c.imu.latency}};
    j["controller"] = {{"gain_per_s", c.controller.gain}, {"deadband_deg", c.controller.deadband}};
    j["bus"] = {{"latency", to_json(c.bus.latency)},
                {"drop_probability", c.bus.drop_probability},
                {"duplicate_probability", c.bus.duplicate_probability},
                {"failover_windows", windows}};
    return j;
}

} // namespace mmw::tracksim
