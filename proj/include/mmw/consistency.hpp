// SPDX-License-Identifier: Apache-2.0
//
// mmw-sounding: 28 GHz channel-sounding analysis and beam-tracking simulation
// ------------------------------------------------------------------------

#pragma once

#include "core.hpp"
#include "csv.hpp"
#include "geo.hpp"
#include "sounder.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <variant>
#include <vector>

namespace mmw::consistency {

// A PDP's linear amplitudes along the full delay axis, tagged with where it
// was taken: a position (spatial lag) or a yaw misalignment (angular lag).
struct AmplitudeVector {
    std::variant<geo::GeoFix, double> tag;
    std::vector<double> magnitudes;
};

struct CorrelationPoint {
    double lag = 0.0;  // mean pair lag within the bin
    double rho = 0.0;
    std::size_t pair_count = 0;
};

struct AutocorrResult {
    std::vector<CorrelationPoint> points;
    std::size_t degenerate_pairs = 0;  // zero-variance vectors, skipped
    std::size_t unbinned_pairs = 0;    // lag beyond the last edge
};

struct ExpFit {
    double a = 0.0;
    double L = 1.0;
    double c = 0.0;
    double rms_residual = 0.0;
    bool decay_identifiable = true;

    double operator()(double lag) const { return a * std::exp(-lag / L) + c; }
};

inline std::vector<double> amplitude_vector(const sounder::ProcessedPdp& processed)
{
    if (processed.power_db.empty())
        throw Error(ErrorCode::InvalidInput, "empty PDP");
    std::vector<double> m(processed.power_db.size());
    std::transform(processed.power_db.begin(), processed.power_db.end(), m.begin(),
                   [](double p) { return std::sqrt(db_to_linear(p)); });
    return m;
}

inline double lag_between(const AmplitudeVector& a, const AmplitudeVector& b)
{
    if (a.tag.index() != b.tag.index())
        throw Error(ErrorCode::InvalidInput, "track mixes spatial and angular tags");
    if (const auto* fa = std::get_if<geo::GeoFix>(&a.tag))
        return geo::distance(*fa, std::get<geo::GeoFix>(b.tag)).d3d;
    return std::abs(wrap_180(std::get<double>(a.tag) - std::get<double>(b.tag)));
}

// Pearson correlation of two equal-length vectors, each centered on its own
// mean. nullopt when either has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n)
        throw Error(ErrorCode::InvalidInput, "pearson needs equal non-empty vectors");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Bins centred on 0, width, 2*width, ...: edges 0, width/2, 3*width/2, ...
// up to the first edge beyond max_lag.
inline std::vector<double> uniform_edges(double width, double max_lag)
{
    if (!(width > 0.0) || !(max_lag >= 0.0))
        throw Error(ErrorCode::InvalidInput, "bin width must be > 0");
    std::vector<double> e{0.0, 0.5 * width};
    while (e.back() <= max_lag)
        e.push_back(e.back() + width);
    return e;
}

// Every pair i <= j (self-pairs included) lands in the bin [e_k, e_k+1) that
// holds its lag; each bin reports the mean of its per-pair correlations.
inline AutocorrResult autocorr(std::span<const AmplitudeVector> track, std::span<const double> lag_edges)
{
    if (track.size() < 2)
        throw Error(ErrorCode::InsufficientSamples, "autocorrelation needs >= 2 vectors");
    if (lag_edges.size() < 2 || !std::is_sorted(lag_edges.begin(), lag_edges.end()))
        throw Error(ErrorCode::InvalidInput, "lag edges must be >= 2 ascending values");
    const std::size_t len = track.front().magnitudes.size();
    for (const auto& v : track) {
        if (v.magnitudes.size() != len || len == 0)
            throw Error(ErrorCode::InvalidInput, "amplitude vectors must share one delay grid");
        for (double m : v.magnitudes)
            if (!(m >= 0.0))
                throw Error(ErrorCode::InvalidInput, "amplitudes must be >= 0");
    }

    const std::size_t nbins = lag_edges.size() - 1;
    std::vector<double> rho_sum(nbins, 0.0), lag_sum(nbins, 0.0);
    std::vector<std::size_t> count(nbins, 0);
    AutocorrResult res;
    for (std::size_t i = 0; i < track.size(); ++i)
        for (std::size_t j = i; j < track.size(); ++j) {
            const auto r = pearson(track[i].magnitudes, track[j].magnitudes);
            if (!r) {
                ++res.degenerate_pairs;
                continue;
            }
            const double lag = i == j ? 0.0 : lag_between(track[i], track[j]);
            const auto it = std::upper_bound(lag_edges.begin(), lag_edges.end(), lag);
            if (it == lag_edges.begin() || it == lag_edges.end()) {
                ++res.unbinned_pairs;
                continue;
            }
            const auto b = static_cast<std::size_t>(it - lag_edges.begin()) - 1;
            rho_sum[b] += *r;
            lag_sum[b] += lag;
            ++count[b];
        }
    for (std::size_t b = 0; b < nbins; ++b)
        if (count[b] > 0) {
            const double n = static_cast<double>(count[b]);
            res.points.push_back({lag_sum[b] / n, std::clamp(rho_sum[b] / n, -1.0, 1.0), count[b]});
        }
    return res;
}

namespace detail {

struct Weighted {
    std::vector<double> lag, y, w;
};

// Bounded least squares for (a, c) at a fixed L over the polygon
// a, c in [0, 1], a + c <= 1 + eps. The objective is a convex quadratic, so
// the minimum is interior or on an edge; each edge is a clipped 1-D solve.
struct LinearFit {
    double a = 0.0, c = 0.0, sse = std::numeric_limits<double>::infinity();
};

inline double sse_of(const Weighted& d, const std::vector<double>& e, double a, double c)
{
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double r = a * e[i] + c - d.y[i];
        s += d.w[i] * r * r;
    }
    return s;
}

inline constexpr double sum_eps = 1e-9;

inline LinearFit solve_ac(const Weighted& d, double L)
{
    std::vector<double> e(d.lag.size());
    for (std::size_t i = 0; i < e.size(); ++i)
        e[i] = std::exp(-d.lag[i] / L);
    double sw = 0.0, se = 0.0, see = 0.0, sy = 0.0, sey = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        sw += d.w[i];
        se += d.w[i] * e[i];
        see += d.w[i] * e[i] * e[i];
        sy += d.w[i] * d.y[i];
        sey += d.w[i] * e[i] * d.y[i];
    }
    const double hi = 1.0 + sum_eps;
    auto feasible = [&](double a, double c) { return a >= 0.0 && a <= 1.0 && c >= 0.0 && c <= 1.0 && a + c <= hi; };
    LinearFit best;
    auto consider = [&](double a, double c) {
        if (!feasible(a, c))
            return;
        const double s = sse_of(d, e, a, c);
        if (s < best.sse)
            best = {a, c, s};
    };

    const double det = sw * see - se * se;
    if (det > 1e-300 * std::max(1.0, sw * see))
        consider((sw * sey - se * sy) / det, (see * sy - se * sey) / det);
    for (double a : {0.0, 1.0}) {
        const double c = std::clamp((sy - a * se) / sw, 0.0, std::min(1.0, hi - a));
        consider(a, c);
    }
    for (double c : {0.0, 1.0}) {
        const double a = see > 0.0 ? std::clamp((sey - c * se) / see, 0.0, std::min(1.0, hi - c)) : 0.0;
        consider(a, c);
    }
    // Edge a + c = 1: y - 1 = a (e - 1).
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        num += d.w[i] * (e[i] - 1.0) * (d.y[i] - 1.0);
        den += d.w[i] * (e[i] - 1.0) * (e[i] - 1.0);
    }
    if (den > 0.0) {
        const double a = std::clamp(num / den, 0.0, 1.0);
        consider(a, 1.0 - a);
    }
    return best;
}

} // namespace detail

// Weighted least squares fit of rho(lag) = a exp(-lag/L) + c.
inline ExpFit fit_exponential(std::span<const CorrelationPoint> points)
{
    detail::Weighted d;
    for (const auto& p : points) {
        d.lag.push_back(p.lag);
        d.y.push_back(p.rho);
        d.w.push_back(static_cast<double>(std::max<std::size_t>(p.pair_count, 1)));
    }
    {
        auto lags = d.lag;
        std::sort(lags.begin(), lags.end());
        if (std::unique(lags.begin(), lags.end()) - lags.begin() < 3)
            throw Error(ErrorCode::InsufficientPoints, "exponential fit needs >= 3 distinct lags");
    }
    const double max_lag = *std::max_element(d.lag.begin(), d.lag.end());
    double min_step = std::numeric_limits<double>::infinity();
    {
        auto lags = d.lag;
        std::sort(lags.begin(), lags.end());
        for (std::size_t i = 1; i < lags.size(); ++i)
            if (lags[i] > lags[i - 1])
                min_step = std::min(min_step, lags[i] - lags[i - 1]);
    }

    // Coarse log grid over L, then golden-section on log L around the best.
    const double lo = std::log(min_step / 10.0), hi = std::log(std::max(max_lag, min_step) * 100.0);
    constexpr int n_grid = 241;
    std::vector<double> sse(n_grid);
    int best_i = 0;
    for (int i = 0; i < n_grid; ++i) {
        sse[i] = detail::solve_ac(d, std::exp(lo + (hi - lo) * i / (n_grid - 1))).sse;
        if (sse[i] < sse[best_i])
            best_i = i;
    }
    double x_lo = lo + (hi - lo) * std::max(best_i - 1, 0) / (n_grid - 1);
    double x_hi = lo + (hi - lo) * std::min(best_i + 1, n_grid - 1) / (n_grid - 1);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double x) { return detail::solve_ac(d, std::exp(x)).sse; };
    double x1 = x_hi - g * (x_hi - x_lo), x2 = x_lo + g * (x_hi - x_lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && x_hi - x_lo > 1e-14; ++it) {
        if (f1 <= f2) {
            x_hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = x_hi - g * (x_hi - x_lo);
            f1 = f(x1);
        } else {
            x_lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = x_lo + g * (x_hi - x_lo);
            f2 = f(x2);
        }
    }
    double x_best = 0.5 * (x_lo + x_hi);
    if (f(x_best) > sse[best_i])
        x_best = lo + (hi - lo) * best_i / (n_grid - 1);

    ExpFit fit;
    fit.L = std::exp(x_best);
    const auto lin = detail::solve_ac(d, fit.L);
    fit.a = lin.a;
    fit.c = lin.c;
    double model_sse = lin.sse;

    // The constant model is nested (a = 0); prefer it when it is no worse.
    double sw = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < d.y.size(); ++i) {
        sw += d.w[i];
        sy += d.w[i] * d.y[i];
    }
    const double c0 = std::clamp(sy / sw, 0.0, 1.0);
    const std::vector<double> zeros(d.y.size(), 0.0);
    const double const_sse = detail::sse_of(d, zeros, 0.0, c0);
    if (const_sse <= model_sse || fit.a <= 1e-9) {
        fit.decay_identifiable = false;
        if (const_sse <= model_sse) {
            fit.a = 0.0;
            fit.c = c0;
            model_sse = const_sse;
        }
    }
    fit.rms_residual = std::sqrt(model_sse / sw);
    return fit;
}

// ---- files ------------------------------------------------------------------

inline void write_points(std::ostream& out, std::span<const CorrelationPoint> points)
{
    out << "lag,rho,pair_count\n";
    for (const auto& p : points)
        out << csv::fmt(p.lag) << ',' << csv::fmt(p.rho) << ',' << p.pair_count << '\n';
}

inline nlohmann::ordered_json to_json(const ExpFit& f)
{
    return {{"a", f.a}, {"L", f.L}, {"c", f.c}, {"rms_residual", f.rms_residual},
            {"decay_identifiable", f.decay_identifiable}};
}

} // namespace mmw::consistency
