// Acceptance run: one PASS/FAIL line per criterion, supporting numbers indented below it.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "orbit_imager/pipeline.hpp"

using namespace orbit_imager;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

const std::string scenario_dir = ORBIT_SCENARIO_DIR;
const std::vector<std::string> bundled{"line_ex1", "arc_ex2", "line_r6", "stationary", "two_trajectories"};

Scenario load(const std::string& name) { return parse_config(scenario_dir + "/" + name + ".json"); }

template <class... Args>
void note(const char* format, Args... args)
{
    std::printf("    ");
    std::printf(format, args...);
    std::printf("\n");
    std::fflush(stdout);
}

int failures = 0;

void verdict(int id, const char* title, bool pass)
{
    std::printf("%s  [%2d] %s\n", pass ? "PASS" : "FAIL", id, title);
    std::fflush(stdout);
    failures += !pass;
}

std::vector<Point> fibonacci_sphere(double R, int count)
{
    const double golden = pi * (3.0 - std::sqrt(5.0));
    std::vector<Point> out;
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / count;
        const double rho = std::sqrt(1.0 - z * z);
        out.emplace_back(R * rho * std::cos(golden * i), R * rho * std::sin(golden * i), R * z);
    }
    return out;
}

struct Observed
{
    int points = 0;
    int mismatches = 0;
    int oracle_mismatches = 0;
    double extrema_gap = 0.0;
};

Observed check_rule(const Trajectory& traj, const std::vector<Point>& pts, const std::function<bool(const Point&)>& rule)
{
    const Medium medium(1.0);
    constexpr double tol = 1e-6;
    Observed o;
    for (const Point& x : pts) {
        const Observability ob = classify_observable(traj, medium, x);
        const bool expected = rule(x);
        ++o.points;
        if (ob.observable() != expected && std::abs(ob.margin) > tol)
            ++o.mismatches;
        const PhaseExtrema e = phase_extrema(traj, medium, x);
        const BruteExtrema b = brute_force_extrema(traj, medium, x);
        o.extrema_gap = std::max({o.extrema_gap, std::abs(b.xi_min - e.xi_min), std::abs(b.xi_max - e.xi_max)});
        const double brute_margin = (b.xi_max - b.xi_min) - traj.duration() * medium.c() / medium.c();
        if ((brute_margin >= -tol) != expected && std::abs(brute_margin) > tol)
            ++o.oracle_mismatches;
    }
    return o;
}

void criterion_observability()
{
    bool pass = true;

    std::vector<Point> sphere2 = fibonacci_sphere(2.0, 200);
    for (double th : {0.0, pi / 2, pi, 3 * pi / 2})
        sphere2.emplace_back(2 * std::cos(th), 2 * std::sin(th), 0.0);
    const Observed line = check_rule(load("line_ex1").build_trajectory(), sphere2,
                                     [](const Point& x) { return x(2) <= 0.0; });
    note("line_ex1: %d points, %d rule mismatches, %d oracle mismatches, max extrema gap %.2e", line.points,
         line.mismatches, line.oracle_mismatches, line.extrema_gap);

    std::vector<Point> arc_pts = fibonacci_sphere(2.0, 200);
    for (const Point& p : {Point(2, 0, 0), Point(-2, 0, 0), Point(0, 0, 2), Point(0, 0, -2)})
        arc_pts.push_back(p);
    const Observed arc = check_rule(load("arc_ex2").build_trajectory(), arc_pts,
                                    [](const Point& x) { return x(1) >= 0.0; });
    note("arc_ex2: %d points, %d rule mismatches, %d oracle mismatches, max extrema gap %.2e", arc.points,
         arc.mismatches, arc.oracle_mismatches, arc.extrema_gap);

    std::vector<Point> r6 = fibonacci_sphere(6.0, 200);
    r6.emplace_back(0, 0, 6);
    r6.emplace_back(std::sqrt(27.0), 0, 3);
    r6.emplace_back(0, -std::sqrt(27.0), 3);
    const Observed far = check_rule(load("line_r6").build_trajectory(), r6, [](const Point& x) {
        return (x(2) >= -6.0 && x(2) <= 3.0) || std::abs(x(2) - 6.0) < 1e-12;
    });
    note("line_r6: %d points, %d rule mismatches, %d oracle mismatches, max extrema gap %.2e", far.points,
         far.mismatches, far.oracle_mismatches, far.extrema_gap);

    for (const Observed& o : {line, arc, far})
        pass = pass && o.mismatches == 0 && o.oracle_mismatches == 0 && o.extrema_gap <= 1e-8;
    verdict(1, "observability boundaries (line x3<=0, arc x2>=0, R=6 line x3 in [-6,3]u{6}, brute-force oracle)", pass);
}

void criterion_annulus()
{
    const Medium medium(1.0);
    const Trajectory line = load("line_ex1").build_trajectory();
    const Point x(0, 0, -2);
    const AnnulusBounds A = annulus(line, medium, x);
    const AnnulusBounds L = enclosing_annulus(line, x);
    const bool monotone = monotone_noncontracting(line, medium, x);
    note("line_ex1 x=(0,0,-2): A=(%.9f, %.9f) Lambda=(%.9f, %.9f) monotone=%d", A.r_lo, A.r_hi, L.r_lo, L.r_hi,
         monotone);
    bool pass = std::abs(A.r_lo - 1.0) <= 1e-6 && std::abs(A.r_hi - 3.0) <= 1e-6 && std::abs(L.r_lo - A.r_lo) <= 1e-6 &&
                std::abs(L.r_hi - A.r_hi) <= 1e-6 && monotone;

    const Scenario still = load("stationary");
    const Trajectory z = still.build_trajectory();
    double widest = 0.0;
    for (const Point& p : still.points())
        widest = std::max(widest, annulus(z, still.medium(), p).width());
    note("stationary: widest annulus %.3e over %zu points", widest, still.points().size());
    pass = pass && widest <= 1e-6;
    verdict(2, "annulus identities (A=(1,3)=Lambda at (0,0,-2); stationary width <= 1e-6)", pass);
}

struct Subset
{
    std::vector<NearFieldRecord> records;
    std::vector<PointClassification> classes;
};

Subset select(const Scenario& s, bool observable)
{
    const auto classes = classify_points(s);
    Scenario clean = s;
    clean.noise.delta = 0.0;
    const auto records = synthesize_records(clean);
    Subset out;
    for (std::size_t j = 0; j < classes.size(); ++j)
        if (classes[j].observability.observable() == observable) {
            out.records.push_back(records[j]);
            out.classes.push_back(classes[j]);
        }
    return out;
}

void criterion_suppression()
{
    const Scenario s = load("line_ex1");
    const Subset hidden = select(s, false);
    const Trajectory traj = s.build_trajectory();
    const PicardFields sums = picard_sums(hidden.records, s.grid.build(), traj.t_min(), traj.t_max(), s.medium(), s.method);
    double worst = 0.0;
    for (std::size_t j = 0; j < hidden.records.size(); ++j) {
        const ScalarField W = single_indicator(sums, j);
        const double top = *std::max_element(W.values.begin(), W.values.end());
        worst = std::max(worst, top);
        const Point& x = hidden.classes[j].x;
        note("x=(%+.3f, %+.3f, %+.3f) margin=%+.3f  max W=%.3e", x(0), x(1), x(2), hidden.classes[j].observability.margin,
             top);
    }
    verdict(3, "non-observable suppression on line_ex1 at 64^3 (max W < 1e-5)", !hidden.records.empty() && worst < 1e-5);
}

double localization(const ScalarField& W, const std::vector<bool>& region)
{
    return containment_fraction(quantile_mask(W.values, 0.9), region);
}

void criterion_localization()
{
    bool singles = true;
    bool fused_ok = true;
    for (const char* name : {"line_ex1", "arc_ex2"}) {
        const Scenario s = load(name);
        const SamplingGrid grid = s.grid.build();
        const Trajectory traj = s.build_trajectory();
        const Subset seen = select(s, true);
        std::vector<std::vector<bool>> regions;
        for (const auto& pc : seen.classes)
            regions.push_back(dilate(grid, shell_mask(grid, pc.x, pc.annulus.r_lo, pc.annulus.r_hi)));

        for (EigenMethod method : {EigenMethod::PaperShortcut, EigenMethod::DirectHermitian}) {
            const PicardFields sums = picard_sums(seen.records, grid, traj.t_min(), traj.t_max(), s.medium(), method);
            double lowest = 1.0;
            std::string line;
            for (std::size_t j = 0; j < seen.records.size(); ++j) {
                const double f = localization(single_indicator(sums, j), regions[j]);
                lowest = std::min(lowest, f);
                char buf[16];
                std::snprintf(buf, sizeof buf, " %.3f", f);
                line += buf;
            }
            note("%s %s single-point fractions:%s", name, to_string(method), line.c_str());
            if (method == s.method)
                singles = singles && lowest >= 0.95;

            if (method == s.method) {
                const ScalarField fused = fuse(sums, s.threshold);
                std::vector<bool> meet(grid.size(), true);
                std::size_t inside = 0;
                for (std::size_t idx = 0; idx < grid.size(); ++idx) {
                    for (int j : fused.meta.points_used)
                        meet[idx] = meet[idx] && regions[j][idx];
                    inside += meet[idx];
                }
                const double f = localization(fused, meet);
                note("%s %s fused: %.3f of the top decile inside the dilated intersection (%zu of %zu voxels, %.1f%%)",
                     name, to_string(method), f, inside, grid.size(), 100.0 * inside / grid.size());
                fused_ok = fused_ok && f >= 0.95;
            }
        }
    }
    note("single-point localization (configured method): %s; fused localization: %s", singles ? "pass" : "fail",
         fused_ok ? "pass" : "fail");
    verdict(4, "observable localization (>= 95% of top decile inside the one-cell dilated annulus, single and fused)",
            singles && fused_ok);
}

void criterion_factorization()
{
    double worst = 0.0;
    for (const auto& name : bundled) {
        const Scenario s = load(name);
        std::vector<Trajectory> orbits{s.build_trajectory()};
        if (s.second_trajectory)
            orbits.push_back(build_trajectory(*s.second_trajectory));
        const Amplitude amp = s.build_amplitude();
        double local = 0.0;
        for (const Trajectory& traj : orbits)
            for (const Point& x : s.points()) {
                const NearFieldRecord rec =
                    synthesize_record(traj, amp, s.medium(), x, s.band.build(), s.quadrature.build());
                local = std::max(local, factorization_residual(rec, traj, amp, s.medium()));
            }
        note("%s: max relative residual %.3e", name.c_str(), local);
        worst = std::max(worst, local);
    }
    verdict(5, "factorization oracle on all bundled scenarios (||M - L T L*||_F / ||M||_F <= 1e-3)", worst <= 1e-3);
}

void criterion_range()
{
    bool pass = true;
    int tested = 0;
    for (const auto& name : bundled) {
        const Scenario s = load(name);
        const Trajectory traj = s.build_trajectory();
        RangeSeparation pooled;
        for (const auto& pc : classify_points(s)) {
            if (!pc.observability.observable() || pc.annulus.width() <= 1e-6)
                continue;
            const auto rs = range_separation(traj, s.medium(), pc.x, pc.annulus, s.band.build());
            pooled.inside.insert(pooled.inside.end(), rs.inside.begin(), rs.inside.end());
            pooled.outside.insert(pooled.outside.end(), rs.outside.begin(), rs.outside.end());
        }
        if (pooled.inside.empty()) {
            note("%s: no observable point with a proper annulus", name.c_str());
            continue;
        }
        ++tested;
        const double ratio = pooled.ratio();
        note("%s: median inside %.3e, median outside %.3e, ratio %.3e", name.c_str(), detail::median(pooled.inside),
             detail::median(pooled.outside), ratio);
        pass = pass && ratio >= 10.0;
    }
    verdict(6, "range-test separation (median outside >= 10x median inside)", pass && tested > 0);
}

void criterion_fourier()
{
    double test_worst = 0.0, lpsi_worst = 0.0;
    for (const auto& name : bundled) {
        const Scenario s = load(name);
        const Trajectory traj = s.build_trajectory();
        double tw = 0.0, lw = 0.0;
        for (const auto& pc : classify_points(s)) {
            for (double r : {pc.enclosing.r_lo, 0.5 * (pc.enclosing.r_lo + pc.enclosing.r_hi), pc.enclosing.r_hi}) {
                const Point y = pc.x + Point(0.0, 0.0, r);
                tw = std::max(tw, test_function_support(traj, s.medium(), pc.x, y).worst_excess_bins);
            }
            lw = std::max(lw, l_psi_support(traj, s.medium(), pc.x, 20, s.noise.seed).worst_excess_bins);
        }
        note("%s: test-function endpoint offset %.3f bins, L psi excess %.3f bins (20 random psi per point)",
             name.c_str(), tw, lw);
        test_worst = std::max(test_worst, tw);
        lpsi_worst = std::max(lpsi_worst, lw);
    }
    verdict(7, "Fourier supports (test function and L psi within 2 bins)", test_worst <= 2.0 && lpsi_worst <= 2.0);
}

void criterion_synthesis()
{
    const Scenario still = load("stationary");
    const Trajectory z = still.build_trajectory();
    const Amplitude one = still.build_amplitude();
    const Point source = z.position(z.t_min());
    const Complex i(0.0, 1.0);
    double closed = 0.0;
    for (const Point& x : still.points()) {
        const double d = (x - source).norm();
        const double l = one(z.t_min());
        for (double w : {0.3, 1.5, 3.3, 5.7, 6.0}) {
            const Complex exact = l * std::exp(i * w * d) / (8 * pi * pi * d) *
                                  (std::exp(i * w * z.t_max()) - std::exp(i * w * z.t_min())) / (i * w);
            const Complex u = synthesize(z, one, still.medium(), x, w);
            closed = std::max(closed, std::abs(u - exact) / std::abs(exact));
        }
    }
    note("stationary closed form: max relative error %.3e", closed);

    double asym = 0.0, drift = 0.0;
    for (const auto& name : bundled) {
        const Scenario s = load(name);
        const Trajectory traj = s.build_trajectory();
        const Amplitude amp = s.build_amplitude();
        const FrequencyBand band = s.band.build();
        const FrequencySamples f = sample_frequencies(band);
        for (const Point& x : s.points()) {
            const NearFieldRecord rec = synthesize_record(traj, amp, s.medium(), x, band, s.quadrature.build());
            const NearFieldRecord fine =
                synthesize_record(traj, amp, s.medium(), x, band, s.quadrature.build().refined());
            for (int n = 0; n < band.N(); ++n) {
                const Complex u = synthesize(traj, amp, s.medium(), x, f.omega[n], s.quadrature.build());
                const Complex v = synthesize(traj, amp, s.medium(), x, -f.omega[n], s.quadrature.build());
                asym = std::max(asym, std::abs(v - std::conj(u)));
                drift = std::max(drift, std::abs(fine.samples_plus[n] - rec.samples_plus[n]) / std::abs(rec.samples_plus[n]));
            }
        }
    }
    note("conjugate symmetry: max |u(-w) - conj u(w)| = %.3e; doubling drift %.3e", asym, drift);
    verdict(8, "synthesis (closed form 1e-8, exact conjugate symmetry, self-convergence < 1e-7)",
            closed <= 1e-8 && asym == 0.0 && drift < 1e-7);
}

void criterion_noise()
{
    Scenario s = load("line_ex1");
    const SamplingGrid grid = s.grid.build();
    const Trajectory traj = s.build_trajectory();
    const double reach = grid.spacing().norm();
    const auto classes = classify_points(s);
    bool pass = true;
    for (double delta : {0.0, 0.05, 0.10}) {
        s.noise.delta = delta;
        const InversionResult inv = invert(s, synthesize_records(s));
        const auto top = quantile_mask(inv.fused.values, 0.9);
        int checked = 0, hit = 0;
        for (int j : inv.fused.meta.points_used) {
            const Point& x = classes[j].x;
            if (!classes[j].observability.observable())
                continue;
            ++checked;
            const double r_start = (x - traj.position(traj.t_min())).norm();
            const double r_end = (x - traj.position(traj.t_max())).norm();
            bool near_start = false, near_end = false;
            for (std::size_t idx = 0; idx < grid.size(); ++idx) {
                if (!top[idx])
                    continue;
                const double r = (grid.point(idx) - x).norm();
                near_start = near_start || std::abs(r - r_start) <= reach;
                near_end = near_end || std::abs(r - r_end) <= reach;
            }
            hit += near_start && near_end;
        }
        note("delta=%.2f: %zu points kept, %d/%d observable points with both endpoint spheres met", delta,
             inv.fused.meta.points_used.size(), hit, checked);
        pass = pass && checked > 0 && hit == checked;
    }

    s.noise.delta = 0.20;
    const fs::path dir = fs::temp_directory_path() / "orbit_imager_acceptance_noise";
    fs::remove_all(dir);
    s.output.dir = dir.string();
    std::ostringstream log;
    const int code = run(s, Command::Invert, {&log});
    note("delta=0.20: invert exit code %d", code);
    fs::remove_all(dir);
    verdict(9, "noise robustness (delta <= 0.10 meets both endpoint spheres; delta = 0.20 completes)", pass && code == 0);
}

std::map<std::string, std::string> csv_artifacts(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".csv")
            continue;
        std::ifstream is(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

void criterion_determinism()
{
    Scenario s = load("line_ex1");
    s.noise.delta = 0.05;
    std::vector<std::map<std::string, std::string>> runs;
    for (int k = 0; k < 2; ++k) {
        const fs::path dir = fs::temp_directory_path() / ("orbit_imager_acceptance_run" + std::to_string(k));
        fs::remove_all(dir);
        s.output.dir = dir.string();
        std::ostringstream log;
        const int code = run(s, Command::Full, {&log});
        if (code != 0)
            note("run %d exit code %d", k, code);
        runs.push_back(csv_artifacts(dir));
        fs::remove_all(dir);
    }
    const bool same = runs[0] == runs[1] && !runs[0].empty();
    note("%zu CSV artifacts per run, identical: %s", runs[0].size(), same ? "yes" : "no");
    verdict(10, "determinism of full-run CSV artifacts (line_ex1, delta=0.05, fixed seed)", same);
}

} // namespace

int main()
{
    try {
        criterion_observability();
        criterion_annulus();
        criterion_suppression();
        criterion_localization();
        criterion_factorization();
        criterion_range();
        criterion_fourier();
        criterion_synthesis();
        criterion_noise();
        criterion_determinism();
    } catch (const std::exception& e) {
        std::printf("FAIL  acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
