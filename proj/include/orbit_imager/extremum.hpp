#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <tuple>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace orbit_imager {

inline constexpr std::size_t kDefaultExtremumSamples = 1024;
inline constexpr double kDefaultTimeTolerance = 1e-9;

struct ExtremumSearch
{
    double argmin = 0.0;
    double min = 0.0;
    double argmax = 0.0;
    double max = 0.0;
};

namespace detail {

// Golden-section search for a minimum of f on [lo, hi]; returns (t, f(t)).
template <class F>
std::pair<double, double> golden_minimize(F& f, double lo, double hi, double tol)
{
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double t = 0.5 * (a + b);
    return {t, f(t)};
}

// Refines the most promising sampled local minima of g. `values` holds g on `ts`.
template <class G>
std::pair<double, double> refine_minimum(G& g, const std::vector<double>& ts,
                                         const std::vector<double>& values, double tol)
{
    constexpr std::size_t kMaxCandidates = 8;
    const std::size_t n = ts.size();

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = (i == 0) || values[i] <= values[i - 1];
        const bool right_ok = (i + 1 == n) || values[i] <= values[i + 1];
        if (left_ok && right_ok)
            candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
    if (candidates.size() > kMaxCandidates)
        candidates.resize(kMaxCandidates);

    std::size_t best_sample = candidates.front();
    double best_t = ts[best_sample];
    double best_v = values[best_sample];
    for (std::size_t i : candidates) {
        const double lo = ts[i == 0 ? 0 : i - 1];
        const double hi = ts[i + 1 == n ? n - 1 : i + 1];
        auto [t, v] = golden_minimize(g, lo, hi, tol);
        if (v < best_v) {
            best_v = v;
            best_t = t;
        }
    }
    return {best_t, best_v};
}

} // namespace detail

// Global minimum and maximum of a continuous f on [a, b]: dense uniform sampling
// followed by golden-section refinement of the bracketing sample intervals.
template <class F>
ExtremumSearch extremize(F&& f, double a, double b,
                         std::size_t samples = kDefaultExtremumSamples,
                         double tol = kDefaultTimeTolerance)
{
    if (!(b > a))
        throw DomainError("extremize: empty interval");
    samples = std::max<std::size_t>(samples, 3);

    std::vector<double> ts(samples);
    std::vector<double> values(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        ts[i] = (i + 1 == samples) ? b : a + (b - a) * static_cast<double>(i) / (samples - 1);
        values[i] = f(ts[i]);
    }

    auto g_min = [&](double t) { return f(t); };
    auto g_max = [&](double t) { return -f(t); };
    std::vector<double> negated(samples);
    std::transform(values.begin(), values.end(), negated.begin(), [](double v) { return -v; });

    ExtremumSearch out;
    std::tie(out.argmin, out.min) = detail::refine_minimum(g_min, ts, values, tol);
    double neg_max = 0.0;
    std::tie(out.argmax, neg_max) = detail::refine_minimum(g_max, ts, negated, tol);
    out.max = -neg_max;
    return out;
}

} // namespace orbit_imager
