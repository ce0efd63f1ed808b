#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "trajectory.hpp"

namespace orbit_imager {

using Complex = std::complex<double>;

// Measured band (kappa - K, kappa + K), midpoint-sampled with N points per half band.
class FrequencyBand
{
public:
    FrequencyBand(double kappa, double half_bandwidth, int n) : kappa_(kappa), K_(half_bandwidth), N_(n)
    {
        if (!(half_bandwidth > 0.0) || !std::isfinite(half_bandwidth) || !std::isfinite(kappa))
            throw DomainError("frequency band requires finite kappa and K > 0");
        if (n < 1)
            throw DomainError("frequency band requires N >= 1");
    }

    // Extension of (0, omega_max) to (-omega_max, omega_max) by conjugate symmetry.
    static FrequencyBand symmetric(double omega_max, int n) { return {0.0, omega_max, n}; }

    static FrequencyBand from_interval(double omega_min, double omega_max, int n)
    {
        return {0.5 * (omega_min + omega_max), 0.5 * (omega_max - omega_min), n};
    }

    double kappa() const noexcept { return kappa_; }
    double K() const noexcept { return K_; }
    int N() const noexcept { return N_; }
    double delta_omega() const noexcept { return K_ / N_; }

    bool operator==(const FrequencyBand&) const = default;

private:
    double kappa_;
    double K_;
    int N_;
};

struct FrequencySamples
{
    std::vector<double> omega; // (n - 1/2) dw, n = 1..N
    std::vector<double> tau;   // n dw
    std::vector<double> s;     // (m - 1/2) dw
};

inline FrequencySamples sample_frequencies(const FrequencyBand& band)
{
    FrequencySamples out;
    const double dw = band.delta_omega();
    for (int n = 1; n <= band.N(); ++n) {
        out.omega.push_back((n - 0.5) * dw);
        out.tau.push_back(n * dw);
        out.s.push_back((n - 0.5) * dw);
    }
    return out;
}

struct GaussLegendreComposite
{
    double panels_per_cycle = 8.0;
    int min_panels = 16;
};

struct FixedPanels
{
    int count = 64;
};

struct QuadratureSpec
{
    std::variant<GaussLegendreComposite, FixedPanels> rule = GaussLegendreComposite{};
    int nodes_per_panel = 16;

    void validate() const
    {
        if (nodes_per_panel < 4)
            throw DomainError("quadrature: nodes_per_panel must be >= 4");
        if (const auto* g = std::get_if<GaussLegendreComposite>(&rule)) {
            if (!(g->panels_per_cycle >= 4.0))
                throw DomainError("quadrature: panels_per_cycle must be >= 4");
            if (g->min_panels < 1)
                throw DomainError("quadrature: min_panels must be >= 1");
        } else if (std::get<FixedPanels>(rule).count < 1) {
            throw DomainError("quadrature: fixed panel count must be >= 1");
        }
    }

    // Same rule with twice the panel density.
    QuadratureSpec refined() const
    {
        QuadratureSpec q = *this;
        if (auto* g = std::get_if<GaussLegendreComposite>(&q.rule)) {
            g->panels_per_cycle *= 2.0;
            g->min_panels *= 2;
        } else {
            std::get<FixedPanels>(q.rule).count *= 2;
        }
        return q;
    }
};

namespace detail {

inline int panel_count(const QuadratureSpec& quad, double omega, double xi_max, double t_min,
                       double duration)
{
    if (const auto* fixed = std::get_if<FixedPanels>(&quad.rule))
        return fixed->count;
    const auto& g = std::get<GaussLegendreComposite>(quad.rule);
    const double cycles = std::abs(omega) * (xi_max - t_min + duration) / (2.0 * std::numbers::pi);
    const double wanted = std::ceil(g.panels_per_cycle * cycles);
    return std::max(g.min_panels, static_cast<int>(std::min(wanted, 1e7)));
}

// Integral for omega >= 0 with the phase extrema already known.
inline Complex synthesize_nonnegative(const Trajectory& traj, const Amplitude& amplitude,
                                      const Medium& medium, const Point& x, double omega,
                                      const QuadratureSpec& quad, double xi_max)
{
    const int panels = panel_count(quad, omega, xi_max, traj.t_min(), traj.duration());
    const QuadratureNodes rule =
        composite_gauss_legendre(traj.t_min(), traj.t_max(), panels, quad.nodes_per_panel);
    const double c = medium.c();
    const double scale = 1.0 / (8.0 * std::numbers::pi * std::numbers::pi);
    Complex acc(0.0, 0.0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double t = rule.nodes[q];
        const double d = (x - traj.position(t)).norm();
        const double h = t + d / c;
        acc += rule.weights[q] * amplitude(t) / d * std::polar(1.0, omega * h);
    }
    acc *= scale;
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
        throw QuadratureError("synthesize: non-finite quadrature result");
    return acc;
}

} // namespace detail

// u(x, omega) = int e^{i omega h(t)} l(t) / (8 pi^2 |x - a(t)|) dt.
// Negative frequencies are obtained by conjugation of the positive one.
inline Complex synthesize(const Trajectory& traj, const Amplitude& amplitude, const Medium& medium,
                          const Point& x, double omega, const QuadratureSpec& quad = {})
{
    quad.validate();
    const PhaseExtrema e = phase_extrema(traj, medium, x);
    if (omega < 0.0)
        return std::conj(detail::synthesize_nonnegative(traj, amplitude, medium, x, -omega, quad, e.xi_max));
    return detail::synthesize_nonnegative(traj, amplitude, medium, x, omega, quad, e.xi_max);
}

struct Synthesized
{
    QuadratureSpec quadrature;
};

struct Noisy
{
    double delta = 0.0;
    std::uint64_t seed = 0;
};

struct Loaded
{
};

using Provenance = std::variant<Synthesized, Noisy, Loaded>;

// One observation point and its 2N - 1 frequency samples.
struct NearFieldRecord
{
    Point x = Point::Zero();
    std::vector<Complex> samples_plus;  // u(kappa + omega_n), n = 1..N
    std::vector<Complex> samples_minus; // u(kappa - omega_n), n = 1..N-1
    FrequencyBand band{0.0, 1.0, 1};
    Provenance provenance = Loaded{};

    bool complete() const noexcept
    {
        return static_cast<int>(samples_plus.size()) == band.N() &&
               static_cast<int>(samples_minus.size()) == band.N() - 1;
    }

    // All 2N - 1 (frequency, value) pairs, frequencies ascending.
    std::vector<std::pair<double, Complex>> ascending() const
    {
        const FrequencySamples f = sample_frequencies(band);
        std::vector<std::pair<double, Complex>> out;
        for (int n = band.N() - 1; n >= 1; --n)
            out.emplace_back(band.kappa() - f.omega[n - 1], samples_minus[n - 1]);
        for (int n = 1; n <= band.N(); ++n)
            out.emplace_back(band.kappa() + f.omega[n - 1], samples_plus[n - 1]);
        return out;
    }
};

inline NearFieldRecord synthesize_record(const Trajectory& traj, const Amplitude& amplitude,
                                         const Medium& medium, const Point& x,
                                         const FrequencyBand& band, const QuadratureSpec& quad = {})
{
    quad.validate();
    const PhaseExtrema e = phase_extrema(traj, medium, x);
    const FrequencySamples f = sample_frequencies(band);
    auto at = [&](double omega) {
        if (omega < 0.0)
            return std::conj(
                detail::synthesize_nonnegative(traj, amplitude, medium, x, -omega, quad, e.xi_max));
        return detail::synthesize_nonnegative(traj, amplitude, medium, x, omega, quad, e.xi_max);
    };

    NearFieldRecord rec;
    rec.x = x;
    rec.band = band;
    rec.provenance = Synthesized{quad};
    for (int n = 0; n < band.N(); ++n)
        rec.samples_plus.push_back(at(band.kappa() + f.omega[n]));
    for (int n = 0; n + 1 < band.N(); ++n) {
        if (band.kappa() == 0.0)
            rec.samples_minus.push_back(std::conj(rec.samples_plus[n]));
        else
            rec.samples_minus.push_back(at(band.kappa() - f.omega[n]));
    }
    return rec;
}

namespace detail {

// SplitMix64 finalizer; used to derive independent stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Two standard normal draws clamped to [-1, 1], determined only by the key triple.
inline std::pair<double, double> noise_pair(std::uint64_t seed, std::uint64_t point,
                                            std::uint64_t frequency)
{
    std::mt19937_64 engine(mix64(mix64(mix64(seed) ^ point) ^ frequency));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double g1 = std::clamp(normal(engine), -1.0, 1.0);
    const double g2 = std::clamp(normal(engine), -1.0, 1.0);
    return {g1, g2};
}

} // namespace detail

// u -> Re(u)(1 + delta g1) + i Im(u)(1 + delta g2). The draws for a sample depend only on
// (seed, point_index, frequency index), so the result is independent of evaluation order.
// Frequency index: plus samples 0..N-1, minus samples N..2N-2.
inline NearFieldRecord add_noise(const NearFieldRecord& record, double delta, std::uint64_t seed,
                                 std::uint64_t point_index = 0)
{
    if (!(delta >= 0.0))
        throw DomainError("add_noise: delta must be nonnegative");
    NearFieldRecord out = record;
    out.provenance = Noisy{delta, seed};
    if (delta == 0.0)
        return out;

    auto perturb = [&](Complex u, std::uint64_t freq_index) {
        const auto [g1, g2] = detail::noise_pair(seed, point_index, freq_index);
        return Complex(u.real() * (1.0 + delta * g1), u.imag() * (1.0 + delta * g2));
    };
    const std::uint64_t n_plus = out.samples_plus.size();
    for (std::uint64_t n = 0; n < n_plus; ++n)
        out.samples_plus[n] = perturb(out.samples_plus[n], n);
    for (std::uint64_t n = 0; n < out.samples_minus.size(); ++n) {
        if (out.band.kappa() == 0.0)
            out.samples_minus[n] = std::conj(out.samples_plus[n]);
        else
            out.samples_minus[n] = perturb(out.samples_minus[n], n_plus + n);
    }
    return out;
}

} // namespace orbit_imager
