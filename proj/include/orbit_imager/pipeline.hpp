#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "errors.hpp"
#include "forward.hpp"
#include "imaging.hpp"
#include "record_io.hpp"
#include "scenario.hpp"
#include "spectral.hpp"
#include "trajectory.hpp"
#include "validation.hpp"

namespace orbit_imager {

enum class Command { Classify, Synthesize, Invert, Validate, Full };

inline Command parse_command(const std::string& s)
{
    if (s == "classify") return Command::Classify;
    if (s == "synthesize") return Command::Synthesize;
    if (s == "invert") return Command::Invert;
    if (s == "validate") return Command::Validate;
    if (s == "full") return Command::Full;
    throw DomainError("unknown command '" + s + "'");
}

struct PointClassification
{
    Point x;
    PhaseExtrema extrema;
    Observability observability;
    AnnulusBounds annulus;
    AnnulusBounds enclosing;
    std::optional<bool> ranges_disjoint;
};

inline std::vector<PointClassification> classify_points(const Scenario& s)
{
    const Trajectory traj = s.build_trajectory();
    const Medium medium = s.medium();
    std::optional<Trajectory> second;
    if (s.second_trajectory)
        second = build_trajectory(*s.second_trajectory);
    std::vector<PointClassification> out;
    for (const Point& x : s.points()) {
        PointClassification pc;
        pc.x = x;
        pc.extrema = phase_extrema(traj, medium, x);
        const double margin = pc.extrema.margin;
        pc.observability = {margin >= -kDefaultTimeTolerance ? Visibility::Observable : Visibility::NonObservable,
                            margin};
        pc.annulus = annulus_from_extrema(traj, medium, x, pc.extrema);
        pc.enclosing = enclosing_annulus(traj, x);
        if (second)
            pc.ranges_disjoint = ranges_disjoint_sufficient(traj, *second, medium, x);
        out.push_back(pc);
    }
    return out;
}

inline std::vector<NearFieldRecord> synthesize_records(const Scenario& s)
{
    const Trajectory traj = s.build_trajectory();
    const Amplitude amp = s.build_amplitude();
    const Medium medium = s.medium();
    const FrequencyBand band = s.band.build();
    const QuadratureSpec quad = s.quadrature.build();
    const std::vector<Point> pts = s.points();
    std::vector<NearFieldRecord> records(pts.size());
    detail::parallel_chunks(pts.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
            NearFieldRecord rec = synthesize_record(traj, amp, medium, pts[j], band, quad);
            if (s.noise.delta > 0.0)
                rec = add_noise(rec, s.noise.delta, s.noise.seed, j);
            records[j] = std::move(rec);
        }
    });
    return records;
}

struct InversionResult
{
    PicardFields sums;
    ScalarField fused;
};

inline InversionResult invert(const Scenario& s, const std::vector<NearFieldRecord>& records)
{
    const Trajectory traj = s.build_trajectory();
    PicardFields sums =
        picard_sums(records, s.grid.build(), traj.t_min(), traj.t_max(), s.medium(), s.method);
    ScalarField fused = fuse(sums, s.threshold);
    fused.meta.seed = s.noise.seed;
    fused.meta.scenario_hash = scenario_hash(s);
    return {std::move(sums), std::move(fused)};
}

namespace detail {

inline std::string fmt(double v, const char* spec = "%.12g")
{
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

template <class T>
T median(std::vector<T> v)
{
    if (v.empty())
        return std::numeric_limits<T>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// L applied to several densities at once on the tau grid, without storing L.
inline std::vector<std::vector<Complex>> apply_L(const Trajectory& traj, const Medium& medium, const Point& x,
                                                 const std::vector<double>& tau, const QuadratureNodes& nodes,
                                                 const std::vector<Eigen::VectorXcd>& densities)
{
    std::vector<double> h(nodes.size());
    for (std::size_t q = 0; q < nodes.size(); ++q)
        h[q] = phase(traj, medium, x, nodes.nodes[q]);
    std::vector<std::vector<Complex>> out(densities.size(), std::vector<Complex>(tau.size()));
    parallel_chunks(tau.size(), [&](std::size_t b, std::size_t e) {
        std::vector<Complex> acc(densities.size());
        for (std::size_t p = b; p < e; ++p) {
            std::fill(acc.begin(), acc.end(), Complex(0.0));
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                const Complex k = nodes.weights[q] * std::polar(1.0, tau[p] * h[q]);
                for (std::size_t d = 0; d < densities.size(); ++d)
                    acc[d] += k * densities[d](static_cast<Eigen::Index>(q));
            }
            for (std::size_t d = 0; d < densities.size(); ++d)
                out[d][p] = acc[d];
        }
    });
    return out;
}

// Smooth random densities: low-order cosine series with complex normal coefficients.
inline std::vector<Eigen::VectorXcd> random_smooth_densities(const QuadratureNodes& nodes, double t_min,
                                                             double t_max, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(mix64(seed));
    std::normal_distribution<double> normal;
    std::vector<Eigen::VectorXcd> out;
    for (int d = 0; d < count; ++d) {
        std::array<Complex, 4> coef;
        for (auto& c : coef)
            c = Complex(normal(rng), normal(rng));
        Eigen::VectorXcd psi(static_cast<Eigen::Index>(nodes.size()));
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const double s = (nodes.nodes[q] - t_min) / (t_max - t_min);
            Complex v(0.0);
            for (int k = 0; k < 4; ++k)
                v += coef[k] * std::cos(k * std::numbers::pi * s);
            psi(static_cast<Eigen::Index>(q)) = v;
        }
        out.push_back(std::move(psi));
    }
    return out;
}

} // namespace detail

struct RangeSeparation
{
    std::vector<double> inside;
    std::vector<double> outside;
    double ratio() const { return detail::median(outside) / detail::median(inside); }
};

// Ridge least-squares residuals of test functions with |x - y| inside and outside the annulus.
inline RangeSeparation range_separation(const Trajectory& traj, const Medium& medium, const Point& x,
                                        const AnnulusBounds& a, const FrequencyBand& band)
{
    constexpr int P = 256;
    std::vector<double> tau(P);
    const double top = std::abs(band.kappa()) + band.K();
    for (int p = 0; p < P; ++p)
        tau[p] = (p + 0.5) * top / P;
    const QuadratureNodes nodes = composite_gauss_legendre(traj.t_min(), traj.t_max(), 8, 32);
    const DiscretizedL L = build_L(traj, medium, x, tau, nodes);
    const double c = medium.c();
    const double T = traj.duration();
    RangeSeparation out;
    for (int k = 1; k <= 3; ++k) {
        const double r = a.r_lo + 0.25 * k * a.width();
        const Point y = x + Point(r, 0.0, 0.0);
        out.inside.push_back(range_residual(L, test_function_samples(x, y, tau, traj.t_min(), traj.t_max(), medium)).residual);
    }
    for (double r : {a.r_hi + 0.5 * c * T, a.r_hi + c * T}) {
        const Point y = x + Point(r, 0.0, 0.0);
        out.outside.push_back(range_residual(L, test_function_samples(x, y, tau, traj.t_min(), traj.t_max(), medium)).residual);
    }
    return out;
}

struct SupportCheck
{
    double worst_excess_bins = 0.0; // how far outside the reference interval, in bins (<= 2 passes)
    double bin = 0.0;
};

inline double t_grid_for(const PhaseExtrema& e)
{
    return 4.0 * std::max({std::abs(e.xi_max), std::abs(e.xi_min), 1.0});
}

// Transform of a test function vs [t_min + r/c, t_max + r/c]: both endpoints within `bins`.
inline SupportCheck test_function_support(const Trajectory& traj, const Medium& medium, const Point& x,
                                          const Point& y, std::size_t samples = 2048)
{
    const PhaseExtrema e = phase_extrema(traj, medium, x);
    const double r = (x - y).norm() / medium.c();
    const double t_grid = std::max(t_grid_for(e), 4.0 * (traj.t_max() + r));
    const auto tau = symmetric_tau_grid(t_grid, samples);
    const SupportInterval s = fourier_support(test_function_samples(x, y, tau, traj.t_min(), traj.t_max(), medium),
                                              t_grid, 4.0 * (traj.t_max() + r));
    const double lo = traj.t_min() + r, hi = traj.t_max() + r;
    return {std::max(std::abs(s.lo - lo), std::abs(s.hi - hi)) / s.bin_width, s.bin_width};
}

// Transforms of L psi for random smooth psi: largest excursion beyond [xi_min, xi_max], in bins.
inline SupportCheck l_psi_support(const Trajectory& traj, const Medium& medium, const Point& x, int count,
                                  std::uint64_t seed, std::size_t samples = 2048)
{
    const PhaseExtrema e = phase_extrema(traj, medium, x);
    const double t_grid = t_grid_for(e);
    const auto tau = symmetric_tau_grid(t_grid, samples);
    const QuadratureNodes nodes = default_t_nodes(traj, medium, x, t_grid);
    const auto psis = detail::random_smooth_densities(nodes, traj.t_min(), traj.t_max(), count, seed);
    const auto images = detail::apply_L(traj, medium, x, tau, nodes, psis);
    SupportCheck out{0.0, 0.0};
    for (const auto& g : images) {
        const SupportInterval s = fourier_support(g, t_grid, 4.0 * std::abs(e.xi_max));
        out.bin = s.bin_width;
        const double excess = std::max({0.0, e.xi_min - s.lo, s.hi - e.xi_max}) / s.bin_width;
        out.worst_excess_bins = std::max(out.worst_excess_bins, excess);
    }
    return out;
}

inline ValidationReport validate_scenario(const Scenario& s)
{
    const Trajectory traj = s.build_trajectory();
    const Amplitude amp = s.build_amplitude();
    const Medium medium = s.medium();
    const FrequencyBand band = s.band.build();
    const QuadratureSpec quad = s.quadrature.build();
    const auto classes = classify_points(s);
    ValidationReport report;

    double extrema_gap = 0.0;
    double fact = 0.0;
    double symmetry = 0.0;
    double convergence = 0.0;
    const FrequencySamples f = sample_frequencies(band);
    for (const auto& pc : classes) {
        const BruteExtrema b = brute_force_extrema(traj, medium, pc.x);
        extrema_gap = std::max({extrema_gap, std::abs(b.xi_min - pc.extrema.xi_min), std::abs(b.xi_max - pc.extrema.xi_max)});
        const NearFieldRecord rec = synthesize_record(traj, amp, medium, pc.x, band, quad);
        fact = std::max(fact, factorization_residual(rec, traj, amp, medium));
        const NearFieldRecord fine = synthesize_record(traj, amp, medium, pc.x, band, quad.refined());
        for (int n = 0; n < band.N(); ++n) {
            const Complex u = rec.samples_plus[n];
            convergence = std::max(convergence, std::abs(fine.samples_plus[n] - u) / std::abs(u));
            const Complex neg = synthesize(traj, amp, medium, pc.x, -f.omega[n], quad);
            const Complex pos = synthesize(traj, amp, medium, pc.x, f.omega[n], quad);
            symmetry = std::max(symmetry, std::abs(neg - std::conj(pos)));
        }
    }
    report.add(s.name, "phase_extrema_vs_brute_force", extrema_gap, 10 * kDefaultTimeTolerance,
               extrema_gap <= 10 * kDefaultTimeTolerance);
    report.add(s.name, "factorization_residual", fact, 1e-3, fact <= 1e-3);
    report.add(s.name, "conjugate_symmetry", symmetry, 0.0, symmetry == 0.0);
    report.add(s.name, "quadrature_self_convergence", convergence, 1e-7, convergence < 1e-7);

    std::vector<double> inside, outside;
    for (const auto& pc : classes) {
        if (!pc.observability.observable() || pc.annulus.width() <= 1e-6)
            continue;
        const RangeSeparation rs = range_separation(traj, medium, pc.x, pc.annulus, band);
        inside.insert(inside.end(), rs.inside.begin(), rs.inside.end());
        outside.insert(outside.end(), rs.outside.begin(), rs.outside.end());
    }
    if (!inside.empty()) {
        const double ratio = detail::median(outside) / detail::median(inside);
        report.add(s.name, "range_residual_separation", ratio, 10.0, ratio >= 10.0);
    }

    const PointClassification& first = classes.front();
    const double r_test = first.annulus.empty ? first.enclosing.r_lo : 0.5 * (first.annulus.r_lo + first.annulus.r_hi);
    const SupportCheck tf =
        test_function_support(traj, medium, first.x, first.x + Point(r_test, 0.0, 0.0));
    report.add(s.name, "test_function_support_bins", tf.worst_excess_bins, 2.0, tf.worst_excess_bins <= 2.0);
    const SupportCheck lp = l_psi_support(traj, medium, first.x, 20, s.noise.seed);
    report.add(s.name, "l_psi_support_excess_bins", lp.worst_excess_bins, 2.0, lp.worst_excess_bins <= 2.0);

    for (std::size_t j = 0; j < classes.size(); ++j) {
        if (!classes[j].ranges_disjoint)
            continue;
        report.add(s.name, "ranges_disjoint_sufficient_p" + std::to_string(j), *classes[j].ranges_disjoint ? 1.0 : 0.0,
                   1.0, *classes[j].ranges_disjoint);
    }
    return report;
}

struct RunOptions
{
    std::ostream* log = &std::cerr;
};

namespace detail {

inline std::string artifact(const Scenario& s, const std::string& stage, const std::string& suffix)
{
    return (std::filesystem::path(s.output.dir) / (s.name + "_" + stage + "_" + suffix)).string();
}

inline void write_classification_csv(const Scenario& s, const std::vector<PointClassification>& rows)
{
    const std::string path = artifact(s, "classify", "points.csv");
    std::ofstream os(path);
    if (!os)
        throw IoError(path + ": cannot open for writing");
    os << "# scenario_hash=" << scenario_hash(s) << '\n';
    os << "point,x1,x2,x3,xi_min,xi_max,margin,class,r_lo,r_hi,lambda_lo,lambda_hi";
    const bool pair = s.second_trajectory.has_value();
    if (pair)
        os << ",ranges_disjoint";
    os << '\n';
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const auto& r = rows[j];
        os << j << ',' << fmt(r.x(0)) << ',' << fmt(r.x(1)) << ',' << fmt(r.x(2)) << ',' << fmt(r.extrema.xi_min)
           << ',' << fmt(r.extrema.xi_max) << ',' << fmt(r.extrema.margin) << ','
           << (r.observability.observable() ? "observable" : "non-observable") << ','
           << fmt(r.annulus.r_lo) << ',' << fmt(r.annulus.r_hi) << ',' << fmt(r.enclosing.r_lo) << ','
           << fmt(r.enclosing.r_hi);
        if (pair)
            os << ',' << (*r.ranges_disjoint ? "true" : "false");
        os << '\n';
    }
    if (!os)
        throw IoError(path + ": write failed");
}

inline std::string slice_suffix(const SliceSpec& sl)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "slice_%s_%g.csv", to_string(sl.axis), sl.value);
    return buf;
}

inline void write_invert_meta(const Scenario& s, const InversionResult& inv)
{
    const std::string path = artifact(s, "invert", "meta.json");
    nlohmann::ordered_json j;
    j["scenario"] = s.name;
    j["scenario_hash"] = inv.fused.meta.scenario_hash;
    j["method"] = to_string(s.method);
    j["threshold"] = s.threshold;
    j["noise_delta"] = s.noise.delta;
    j["seed"] = s.noise.seed;
    j["points_used"] = inv.fused.meta.points_used;
    j["points_dropped"] = inv.fused.meta.points_dropped;
    j["all_dropped"] = inv.fused.meta.all_dropped;
    nlohmann::ordered_json mins = nlohmann::ordered_json::array();
    for (const auto& f : inv.sums.sums)
        mins.push_back(*std::min_element(f.begin(), f.end()));
    j["min_picard_sum"] = mins;
    std::ofstream os(path);
    if (!os)
        throw IoError(path + ": cannot open for writing");
    os << j.dump(2) << '\n';
}

} // namespace detail

inline int run(const Scenario& s, Command command, const RunOptions& opts = {})
{
    std::ostream& log = *opts.log;
    const char* stage = "setup";
    try {
        std::filesystem::create_directories(s.output.dir);
        const std::string hash = scenario_hash(s);
        const bool all = command == Command::Full;

        if (all || command == Command::Classify) {
            stage = "classify";
            const auto rows = classify_points(s);
            detail::write_classification_csv(s, rows);
            std::size_t observable = 0;
            for (const auto& r : rows)
                observable += r.observability.observable();
            log << s.name << ": classify " << observable << "/" << rows.size() << " observable\n";
        }

        std::vector<NearFieldRecord> records;
        if (all || command == Command::Synthesize || command == Command::Invert) {
            stage = "synthesize";
            records = synthesize_records(s);
        }
        if (all || command == Command::Synthesize) {
            for (std::size_t j = 0; j < records.size(); ++j)
                write_record_csv(detail::artifact(s, "synthesize", "p" + std::to_string(j) + ".csv"), records[j], hash);
            log << s.name << ": synthesize " << records.size() << " records\n";
        }

        if (all || command == Command::Invert) {
            stage = "invert";
            const InversionResult inv = invert(s, records);
            for (FieldFormat f : s.output.formats)
                export_field(inv.fused, f, detail::artifact(s, "invert", std::string("field.") + detail::format_name(f)));
            for (const auto& sl : s.slices)
                write_slice_csv(detail::artifact(s, "invert", detail::slice_suffix(sl)),
                                extract_slice(inv.fused, sl.axis, sl.value), hash);
            for (std::size_t j = 0; j < inv.sums.eigensystems.size(); ++j)
                write_eigenvalues_csv(detail::artifact(s, "invert", "eigenvalues_p" + std::to_string(j) + ".csv"),
                                      inv.sums.eigensystems[j]);
            detail::write_invert_meta(s, inv);
            log << s.name << ": invert used " << inv.fused.meta.points_used.size() << ", dropped "
                << inv.fused.meta.points_dropped.size() << "\n";
        }

        if (all || command == Command::Validate) {
            stage = "validate";
            const ValidationReport report = validate_scenario(s);
            report.write(detail::artifact(s, "validate", "report.json"));
            for (const auto& c : report.checks)
                log << s.name << ": " << (c.pass ? "pass " : "FAIL ") << c.check << " value=" << c.value
                    << " bound=" << c.bound << "\n";
            if (!report.all_passed())
                return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        log << "error [" << stage << "]: " << e.what() << "\n";
        return 1;
    }
}

} // namespace orbit_imager
