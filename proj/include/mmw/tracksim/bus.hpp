// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "../core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace mmw::tracksim {

inline std::int64_t seconds_to_ns(double s) { return static_cast<std::int64_t>(std::llround(s * 1e9)); }

struct LatencyDistribution {
    enum class Kind { Fixed, Uniform, Lognormal };
    Kind kind = Kind::Fixed;
    double value_s = 0.0;               // fixed
    double low_s = 0.0, high_s = 0.0;   // uniform
    double mean_s = 0.0, sigma = 0.0;   // lognormal: arithmetic mean and log-space sigma

    void validate() const
    {
        const bool ok = (kind == Kind::Fixed && value_s >= 0.0) ||
                        (kind == Kind::Uniform && low_s >= 0.0 && high_s >= low_s) ||
                        (kind == Kind::Lognormal && mean_s > 0.0 && sigma >= 0.0);
        if (!ok)
            throw Error(ErrorCode::ConfigInvalid, "invalid latency distribution");
    }

    template <class Engine>
    double sample(Engine& rng) const
    {
        switch (kind) {
        case Kind::Fixed:
            return value_s;
        case Kind::Uniform:
            return high_s > low_s ? std::uniform_real_distribution<double>(low_s, high_s)(rng) : low_s;
        case Kind::Lognormal: {
            const double mu = std::log(mean_s) - 0.5 * sigma * sigma;
            return sigma > 0.0 ? std::lognormal_distribution<double>(mu, sigma)(rng) : mean_s;
        }
        }
        return value_s;
    }
};

struct FailoverWindow {
    double start_s = 0.0;
    double end_s = 0.0;
};

struct BusConfig {
    LatencyDistribution latency;
    double drop_probability = 0.0;
    double duplicate_probability = 0.0;
    std::vector<FailoverWindow> failover_windows;

    void validate() const
    {
        latency.validate();
        if (!(drop_probability >= 0.0 && drop_probability < 1.0) ||
            !(duplicate_probability >= 0.0 && duplicate_probability < 1.0))
            throw Error(ErrorCode::ConfigInvalid, "drop/duplicate probabilities must lie in [0, 1)");
        for (const auto& w : failover_windows)
            if (!(w.end_s >= w.start_s))
                throw Error(ErrorCode::ConfigInvalid, "failover window ends before it starts");
    }
};

// Outcome of one publish for one subscriber.
struct Delivery {
    std::string subscriber;
    std::uint64_t msg_id = 0;
    std::int64_t t_ns = 0;
    bool duplicate = false;
};

struct Drop {
    std::string subscriber;
    std::uint64_t msg_id = 0;
};

struct PublishOutcome {
    std::vector<Delivery> deliveries;  // in the order they must be scheduled
    std::vector<Drop> drops;
};

// Topic-based broker. Delivery times are computed at publish time; per
// (topic, subscriber) delivery times never decrease, so scheduling the
// returned deliveries in order preserves publish order at each subscriber.
class Bus {
public:
    Bus(BusConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), rng_(seed)
    {
        cfg_.validate();
        for (const auto& w : cfg_.failover_windows)
            windows_.emplace_back(seconds_to_ns(w.start_s), seconds_to_ns(w.end_s));
        std::sort(windows_.begin(), windows_.end());
    }

    void subscribe(const std::string& topic, const std::string& subscriber)
    {
        auto& subs = subscribers_[topic];
        if (std::find(subs.begin(), subs.end(), subscriber) == subs.end())
            subs.push_back(subscriber);
    }

    const std::vector<std::string>& subscribers(const std::string& topic) const
    {
        static const std::vector<std::string> none;
        const auto it = subscribers_.find(topic);
        return it == subscribers_.end() ? none : it->second;
    }

    PublishOutcome publish(const std::string& topic, std::uint64_t msg_id, std::int64_t t_ns)
    {
        PublishOutcome out;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (const auto& sub : subscribers(topic)) {
            // Fault draws happen unconditionally so the random stream does not
            // depend on which faults are enabled.
            const double drop_draw = u(rng_);
            const double dup_draw = u(rng_);
            if (drop_draw < cfg_.drop_probability) {
                out.drops.push_back({sub, msg_id});
                continue;
            }
            const int copies = dup_draw < cfg_.duplicate_probability ? 2 : 1;
            for (int c = 0; c < copies; ++c) {
                const std::int64_t send = defer(t_ns);
                const std::int64_t arrive = defer(send + seconds_to_ns(cfg_.latency.sample(rng_)));
                auto& last = last_delivery_[{topic, sub}];
                last = std::max(last, arrive);
                out.deliveries.push_back({sub, msg_id, last, c > 0});
            }
        }
        return out;
    }

    // Push t to the end of any failover window containing it, [start, end).
    std::int64_t defer(std::int64_t t) const
    {
        bool moved = true;
        while (moved) {
            moved = false;
            for (const auto& [s, e] : windows_)
                if (t >= s && t < e) {
                    t = e;
                    moved = true;
                }
        }
        return t;
    }

    const BusConfig& config() const { return cfg_; }

private:
    BusConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<std::pair<std::int64_t, std::int64_t>> windows_;
    std::map<std::string, std::vector<std::string>> subscribers_;
    std::map<std::pair<std::string, std::string>, std::int64_t> last_delivery_;
};

} // namespace mmw::tracksim
