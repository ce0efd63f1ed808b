#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "json.hpp"

#include "errors.hpp"
#include "forward.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
#include "trajectory.hpp"

namespace orbit_imager {

// entry(p, q) = w_q e^{i tau_p h(t_q)}.
struct DiscretizedL
{
    Eigen::MatrixXcd entries;
    Point x = Point::Zero();
    std::vector<double> tau;
    QuadratureNodes t_nodes;
};

inline DiscretizedL build_L(const Trajectory& traj, const Medium& medium, const Point& x,
                            const std::vector<double>& tau, const QuadratureNodes& t_nodes)
{
    detail::require_off_trajectory(traj, x);
    const auto P = static_cast<Eigen::Index>(tau.size());
    const auto Q = static_cast<Eigen::Index>(t_nodes.size());
    DiscretizedL L{Eigen::MatrixXcd(P, Q), x, tau, t_nodes};
    for (Eigen::Index q = 0; q < Q; ++q) {
        const double w = t_nodes.weights[q];
        if (!(w > 0.0))
            throw DomainError("build_L: quadrature weights must be positive");
        const double h = phase(traj, medium, x, t_nodes.nodes[q]);
        for (Eigen::Index p = 0; p < P; ++p)
            L.entries(p, q) = w * std::polar(1.0, tau[p] * h);
    }
    return L;
}

// Enough Gauss-Legendre panels to resolve e^{i omega h(t)} at the top of the band.
inline QuadratureNodes default_t_nodes(const Trajectory& traj, const Medium& medium, const Point& x,
                                       double omega_max, const QuadratureSpec& quad = {})
{
    const PhaseExtrema e = phase_extrema(traj, medium, x);
    const int panels = detail::panel_count(quad, omega_max, e.xi_max, traj.t_min(), traj.duration());
    return composite_gauss_legendre(traj.t_min(), traj.t_max(), panels, quad.nodes_per_panel);
}

// ||M - dw L_tau diag(T_q / w_q) L_s^*||_F / ||M||_F, T_q = e^{i kappa h} l / (8 pi^2 |x - a|).
inline double factorization_residual(const NearFieldRecord& record, const Trajectory& traj,
                                     const Amplitude& amplitude, const Medium& medium,
                                     const std::optional<QuadratureNodes>& t_nodes = std::nullopt)
{
    const NearFieldMatrix M = assemble(record);
    const FrequencyBand& band = record.band;
    const QuadratureNodes nodes =
        t_nodes ? *t_nodes : default_t_nodes(traj, medium, record.x, std::abs(band.kappa()) + band.K());
    const FrequencySamples f = sample_frequencies(band);
    const DiscretizedL Lt = build_L(traj, medium, record.x, f.tau, nodes);
    const DiscretizedL Ls = build_L(traj, medium, record.x, f.s, nodes);

    const double scale = 1.0 / (8.0 * std::numbers::pi * std::numbers::pi);
    Eigen::VectorXcd middle(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double t = nodes.nodes[q];
        const double d = (record.x - traj.position(t)).norm();
        const double h = t + d / medium.c();
        middle(q) = std::polar(1.0, band.kappa() * h) * amplitude(t) * scale / d / nodes.weights[q];
    }
    const Eigen::MatrixXcd approx =
        band.delta_omega() * (Lt.entries * middle.asDiagonal() * Ls.entries.adjoint());
    const double norm = M.entries.norm();
    if (!(norm > 0.0))
        throw DomainError("factorization_residual: zero near-field matrix");
    return (M.entries - approx).norm() / norm;
}

// tau_p = -T_grid + p * (2 T_grid / P), p = 0..P-1.
inline std::vector<double> symmetric_tau_grid(double t_grid, std::size_t count)
{
    if (!(t_grid > 0.0) || count < 2)
        throw DomainError("symmetric_tau_grid: need T_grid > 0 and at least 2 samples");
    std::vector<double> tau(count);
    const double step = 2.0 * t_grid / static_cast<double>(count);
    for (std::size_t p = 0; p < count; ++p)
        tau[p] = -t_grid + static_cast<double>(p) * step;
    return tau;
}

// phi(tau) = e^{i tau r/c} (e^{i tau t_max} - e^{i tau t_min}) / (i tau T), equal to 1 at tau = 0.
inline std::vector<Complex> test_function_samples(const Point& x, const Point& y,
                                                  const std::vector<double>& tau, double t_min,
                                                  double t_max, const Medium& medium)
{
    const double r = (x - y).norm() / medium.c();
    const double T = t_max - t_min;
    std::vector<Complex> out;
    out.reserve(tau.size());
    for (double s : tau) {
        if (s == 0.0) {
            out.emplace_back(1.0, 0.0);
            continue;
        }
        out.push_back(std::polar(1.0, s * r) * (std::polar(1.0, s * t_max) - std::polar(1.0, s * t_min)) /
                      Complex(0.0, s * T));
    }
    return out;
}

struct SupportInterval
{
    double lo = 0.0;
    double hi = 0.0;
    double bin_width = 0.0;
    double captured = 0.0; // energy fraction inside [lo, hi]
};

enum class SpectralTaper { Rectangular, Hann };

// Smallest interval of the transform variable holding `energy_fraction` of the spectral energy
// of g sampled on symmetric_tau_grid(t_grid, samples.size()).
inline SupportInterval fourier_support(const std::vector<Complex>& samples, double t_grid,
                                       double required_extent, double energy_fraction = 0.99,
                                       SpectralTaper taper = SpectralTaper::Hann)
{
    if (!(t_grid >= required_extent))
        throw DomainError("fourier_support: tau grid extent " + std::to_string(t_grid) +
                          " is below the required " + std::to_string(required_extent));
    if (samples.size() < 2)
        throw DomainError("fourier_support: need at least 2 samples");
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
        throw DomainError("fourier_support: energy fraction must lie in (0, 1]");

    const auto P = static_cast<long>(samples.size());
    // The tapered samples are zero-padded so the spectrum is read between resolution bins.
    constexpr long pad = 4;
    const long Q = pad * P;
    std::vector<Complex> padded(Q, Complex(0.0));
    for (long p = 0; p < P; ++p) {
        double w = 1.0;
        if (taper == SpectralTaper::Hann) {
            const double s = std::sin(std::numbers::pi * static_cast<double>(p) / static_cast<double>(P));
            w = s * s;
        }
        padded[p] = w * samples[p];
    }
    Eigen::FFT<double> fft;
    std::vector<Complex> spectrum;
    fft.fwd(spectrum, padded);

    const double bin = std::numbers::pi / t_grid;
    const double step = bin / static_cast<double>(pad);
    // Reorder so the transform variable t_k = k * step is ascending.
    std::vector<double> energy(Q);
    std::vector<double> t(Q);
    for (long j = 0; j < Q; ++j) {
        const long k = j - Q / 2;
        const long src = ((k % Q) + Q) % Q;
        t[j] = static_cast<double>(k) * step;
        energy[j] = std::norm(spectrum[src]);
    }
    double total = 0.0;
    for (double e : energy)
        total += e;
    if (!(total > 0.0))
        throw DomainError("fourier_support: zero signal");

    const double target = energy_fraction * total;
    SupportInterval best{t.front(), t.back(), bin, 1.0};
    long best_len = Q;
    double window = 0.0;
    long left = 0;
    for (long right = 0; right < Q; ++right) {
        window += energy[right];
        while (left <= right && window - energy[left] >= target) {
            window -= energy[left];
            ++left;
        }
        if (window >= target && right - left < best_len) {
            best_len = right - left;
            best = {t[left], t[right], bin, window / total};
        }
    }
    return best;
}

struct RangeResult
{
    double residual = 0.0;
    double condition = 0.0; // sigma_max / sigma_min of L
    double ridge = 0.0;
};

inline double default_ridge(const DiscretizedL& L)
{
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(L.entries);
    const double s = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    return 1e-10 * s * s;
}

// Ridge-regularized least squares min ||L psi - phi||^2 + ridge ||psi||^2, solved via the SVD.
inline RangeResult range_residual(const DiscretizedL& L, const std::vector<Complex>& phi,
                                  std::optional<double> ridge = std::nullopt)
{
    if (static_cast<Eigen::Index>(phi.size()) != L.entries.rows())
        throw DomainError("range_residual: test samples and L rows differ");
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(L.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double smax = sigma.size() ? sigma(0) : 0.0;
    const double r = ridge.value_or(1e-10 * smax * smax);
    if (!(r >= 0.0))
        throw DomainError("range_residual: ridge must be nonnegative");

    const Eigen::Map<const Eigen::VectorXcd> target(phi.data(), static_cast<Eigen::Index>(phi.size()));
    Eigen::VectorXcd coeff = svd.matrixU().adjoint() * target;
    for (Eigen::Index k = 0; k < coeff.size(); ++k) {
        const double s = sigma(k);
        const double denom = s * s + r;
        coeff(k) = denom > 0.0 ? coeff(k) * (s / denom) : Complex(0.0);
    }
    const Eigen::VectorXcd psi = svd.matrixV() * coeff;
    const double tnorm = target.norm();
    if (!(tnorm > 0.0))
        throw DomainError("range_residual: zero test vector");

    RangeResult out;
    out.residual = (L.entries * psi - target).norm() / tnorm;
    const double smin = sigma.size() ? sigma(sigma.size() - 1) : 0.0;
    out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    out.ridge = r;
    return out;
}

// psi_y(t) = |h'(t)| chi_Y(t) / T at the nodes of L, where Y keeps the first visit of each
// phase value in [t_min + r/c, t_max + r/c].
inline Eigen::VectorXcd membership_density(const Trajectory& traj, const Medium& medium, const Point& x,
                                           const Point& y, const QuadratureNodes& nodes)
{
    const double c = medium.c();
    const double r = (x - y).norm() / c;
    const double eta_lo = traj.t_min() + r;
    const double eta_hi = traj.t_max() + r;
    const double T = traj.duration();
    double seen_lo = std::numeric_limits<double>::infinity();
    double seen_hi = -std::numeric_limits<double>::infinity();
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double t = nodes.nodes[q];
        const Vec3 diff = x - traj.position(t);
        const double d = diff.norm();
        const double h = t + d / c;
        const bool fresh = h < seen_lo || h > seen_hi;
        seen_lo = std::min(seen_lo, h);
        seen_hi = std::max(seen_hi, h);
        if (!fresh || h < eta_lo || h > eta_hi)
            continue;
        const double dh = 1.0 - diff.dot(traj.velocity(t)) / (c * d);
        psi(static_cast<Eigen::Index>(q)) = std::abs(dh) / T;
    }
    return psi;
}

struct BruteExtrema
{
    double xi_min = 0.0;
    double xi_max = 0.0;
};

inline BruteExtrema brute_force_extrema(const Trajectory& traj, const Medium& medium, const Point& x,
                                        std::size_t samples = 1000000)
{
    if (samples < 2)
        throw DomainError("brute_force_extrema: need at least 2 samples");
    BruteExtrema out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    const double step = traj.duration() / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = i + 1 == samples ? traj.t_max() : traj.t_min() + static_cast<double>(i) * step;
        const double h = phase(traj, medium, x, t);
        out.xi_min = std::min(out.xi_min, h);
        out.xi_max = std::max(out.xi_max, h);
    }
    return out;
}

struct ValidationCheck
{
    std::string scenario;
    std::string check;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct ValidationReport
{
    std::vector<ValidationCheck> checks;

    void add(std::string scenario, std::string check, double value, double bound, bool pass)
    {
        checks.push_back({std::move(scenario), std::move(check), value, bound, pass});
    }
    bool all_passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.pass; });
    }

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& c : checks) {
            nlohmann::ordered_json j;
            j["scenario"] = c.scenario;
            j["check"] = c.check;
            j["value"] = std::isfinite(c.value) ? nlohmann::ordered_json(c.value) : nlohmann::ordered_json(nullptr);
            j["bound"] = c.bound;
            j["pass"] = c.pass;
            arr.push_back(std::move(j));
        }
        nlohmann::ordered_json out;
        out["passed"] = all_passed();
        out["checks"] = std::move(arr);
        return out;
    }

    void write(const std::string& path) const
    {
        std::ofstream os(path);
        if (!os)
            throw IoError(path + ": cannot open for writing");
        os << to_json().dump(2) << '\n';
        if (!os)
            throw IoError(path + ": write failed");
    }
};

} // namespace orbit_imager
