#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "orbit_imager/spectral.hpp"

using namespace orbit_imager;
using Catch::Approx;

namespace {

const Medium unit_speed{1.0};

NearFieldRecord paper_record(const Point& x)
{
    const Trajectory line = Trajectory::line({0, 0, -1}, {0, 0, 1}, 1.0, 3.0);
    return synthesize_record(line, Amplitude::polynomial({1, 2, 1}, 1.0, 3.0), unit_speed, x,
                             FrequencyBand::symmetric(6.0, 10));
}

NearFieldMatrix wrap(const Eigen::MatrixXcd& m)
{
    return {m, FrequencyBand(0.0, 1.0, static_cast<int>(m.rows())), Point::Zero()};
}

Eigen::MatrixXcd random_unitary(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = Complex(g(rng), g(rng));
    return Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
}

} // namespace

TEST_CASE("Toeplitz assembly", "[spectral]")
{
    NearFieldRecord one;
    one.band = FrequencyBand(0.0, 1.0, 1);
    one.samples_plus = {Complex(2.0, -1.0)};
    const NearFieldMatrix m1 = assemble(one);
    REQUIRE(m1.entries.rows() == 1);
    CHECK(m1.entries(0, 0) == Complex(2.0, -1.0));

    const NearFieldRecord rec = paper_record({0, 0, -2});
    const NearFieldMatrix m = assemble(rec);
    REQUIRE(m.entries.rows() == 10);
    REQUIRE(m.entries.cols() == 10);
    const double dw = 0.6;
    for (int n = 0; n < 10; ++n)
        CHECK(m.entries(n, 0) == dw * rec.samples_plus[n]);
    for (int k = 1; k < 10; ++k)
        CHECK(m.entries(0, k) == dw * rec.samples_minus[k - 1]);
    for (int n = 0; n + 1 < 10; ++n)
        for (int k = 0; k + 1 < 10; ++k)
            CHECK(m.entries(n, k) == m.entries(n + 1, k + 1));

    NearFieldRecord missing = rec;
    missing.samples_minus.pop_back();
    CHECK_THROWS_AS(assemble(missing), AssemblyError);
}

TEST_CASE("sharp eigensystem of a diagonal matrix", "[spectral]")
{
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = Complex(3, 4);
    d(1, 1) = Complex(-1, -2);
    for (EigenMethod method : {EigenMethod::PaperShortcut, EigenMethod::DirectHermitian}) {
        const SharpEigensystem e = sharp_eigensystem(wrap(d), method);
        CHECK(e.lambdas(0) == Approx(7.0).epsilon(1e-14));
        CHECK(e.lambdas(1) == Approx(3.0).epsilon(1e-14));
        CHECK(std::abs(e.vectors(0, 0) - 1.0) < 1e-14);
        CHECK(std::abs(e.vectors(1, 0)) < 1e-14);
        CHECK(std::abs(e.vectors(1, 1) - 1.0) < 1e-14);
        CHECK(std::abs(e.vectors(0, 1)) < 1e-14);
    }

    const SharpEigensystem z = sharp_eigensystem(wrap(Eigen::MatrixXcd::Zero(3, 3)));
    CHECK(z.lambdas.maxCoeff() == 0.0);
    CHECK(z.lambdas.minCoeff() == 0.0);
}

TEST_CASE("positive Hermitian input is its own sharp form", "[spectral]")
{
    const int n = 6;
    const Eigen::MatrixXcd U = random_unitary(n, 42);
    Eigen::VectorXd d(n);
    d << 5.0, 3.0, 2.5, 1.0, 0.4, 0.01;
    const Eigen::MatrixXcd H = U * d.cast<Complex>().asDiagonal() * U.adjoint();
    const SharpEigensystem p = sharp_eigensystem(wrap(H), EigenMethod::PaperShortcut);
    const SharpEigensystem q = sharp_eigensystem(wrap(H), EigenMethod::DirectHermitian);
    for (int k = 0; k < n; ++k) {
        CHECK(p.lambdas(k) == Approx(d(k)).epsilon(1e-8));
        CHECK(q.lambdas(k) == Approx(d(k)).epsilon(1e-8));
        // Same eigenvector up to phase.
        CHECK(std::abs(p.vectors.col(k).dot(q.vectors.col(k))) == Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("eigensystem invariants on near-field data", "[spectral]")
{
    for (const Point& x : {Point(0, 0, -2), from_spherical(2, 1.0, 0.6), from_spherical(2, 2.0, 2.0)}) {
        const NearFieldMatrix m = assemble(paper_record(x));
        for (EigenMethod method : {EigenMethod::PaperShortcut, EigenMethod::DirectHermitian}) {
            const SharpEigensystem e = sharp_eigensystem(m, method);
            CHECK(e.lambdas.minCoeff() >= 0.0);
            for (int k = 0; k + 1 < e.size(); ++k)
                CHECK(e.lambdas(k) >= e.lambdas(k + 1));
            for (int k = 0; k < e.size(); ++k) {
                CHECK(e.vectors.col(k).norm() == Approx(1.0).epsilon(1e-12));
                Eigen::Index big = 0;
                e.vectors.col(k).cwiseAbs().maxCoeff(&big);
                CHECK(e.vectors(big, k).imag() == 0.0);
                CHECK(e.vectors(big, k).real() > 0.0);
            }
            if (method == EigenMethod::DirectHermitian) {
                const Eigen::MatrixXcd gram = e.vectors.adjoint() * e.vectors;
                CHECK((gram - Eigen::MatrixXcd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }
}

TEST_CASE("test vectors", "[spectral]")
{
    const FrequencyBand band = FrequencyBand::symmetric(6.0, 10);
    const FrequencySamples f = sample_frequencies(band);
    const Point x(0, 0, -2);
    const double t_min = 1.0, t_max = 3.0, T = 2.0;
    const TestVector at_x = test_vector(x, x, band, t_min, t_max, unit_speed);
    for (const Point& y : {Point(0, 0, 0), Point(1, -1, 0.5), Point(0, 0, 1.9)}) {
        const TestVector tv = test_vector(x, y, band, t_min, t_max, unit_speed);
        const double r = (x - y).norm();
        for (int n = 0; n < 10; ++n) {
            const double tau = f.tau[n];
            CHECK(std::abs(tv.components(n)) == Approx(2 * std::abs(std::sin(tau * T / 2)) / (tau * T)).epsilon(1e-12));
            CHECK(std::abs(tv.components(n) - at_x.components(n) * std::polar(1.0, tau * r)) < 1e-14);
        }

        // (1/T) int e^{i tau (t + r)} dt by midpoint at 1e4 and 2e4 nodes, Richardson-extrapolated.
        auto midpoint = [&](int nodes, double tau) {
            Complex acc(0.0);
            const double h = T / nodes;
            for (int q = 0; q < nodes; ++q)
                acc += std::polar(1.0, tau * (t_min + (q + 0.5) * h + r));
            return acc * h / T;
        };
        for (int n = 0; n < 10; ++n) {
            const Complex m1 = midpoint(10000, f.tau[n]);
            const Complex m2 = midpoint(20000, f.tau[n]);
            CHECK(std::abs((4.0 * m2 - m1) / 3.0 - tv.components(n)) < 1e-10);
        }
    }
}

TEST_CASE("single-point indicator", "[spectral]")
{
    const FrequencyBand band = FrequencyBand::symmetric(6.0, 10);
    const Point x(0, 0, -2);
    const SharpEigensystem eig = sharp_eigensystem(assemble(paper_record(x)));
    const double floor = default_lambda_floor(eig);
    const TestVector tv = test_vector(x, {0.3, 0.4, -0.5}, band, 1.0, 3.0, unit_speed);

    const double w = indicator_single(eig, tv, floor);
    TestVector doubled = tv;
    doubled.components *= 2.0;
    CHECK(indicator_single(eig, doubled, floor) == Approx(w / 4).epsilon(1e-14));

    SharpEigensystem shuffled = eig;
    for (int k = 0; k < eig.size(); ++k) {
        shuffled.lambdas(k) = eig.lambdas(eig.size() - 1 - k);
        shuffled.vectors.col(k) = eig.vectors.col(eig.size() - 1 - k);
    }
    CHECK(indicator_single(shuffled, tv, floor) == Approx(w).epsilon(1e-12));

    // Inside A = [1, 3] around x versus well outside it.
    const double inside = indicator_single(eig, test_vector(x, {0, 0, 0}, band, 1.0, 3.0, unit_speed), floor);
    const double outside = indicator_single(eig, test_vector(x, {0, 0, 1.9}, band, 1.0, 3.0, unit_speed), floor);
    CHECK(inside >= 10 * outside);

    CHECK(indicator_single(eig, tv, std::numeric_limits<double>::infinity()) == 0.0);
    TestVector short_tv = tv;
    short_tv.components.conservativeResize(4);
    CHECK_THROWS_AS(indicator_single(eig, short_tv, floor), DomainError);
}

TEST_CASE("indicator truncation and basis invariance", "[spectral][property]")
{
    const FrequencyBand band = FrequencyBand::symmetric(6.0, 10);
    const Point x = from_spherical(2, 0.7, 2.3);
    const NearFieldMatrix m = assemble(paper_record(x));
    const SharpEigensystem eig = sharp_eigensystem(m, EigenMethod::DirectHermitian);
    const TestVector tv = test_vector(x, {0.2, 0.1, -0.4}, band, 1.0, 3.0, unit_speed);

    double previous = 0.0;
    for (int keep = 1; keep <= eig.size(); ++keep) {
        const double w = indicator_single(eig, tv, eig.lambdas(keep - 1) * (1 - 1e-12));
        if (keep > 1)
            CHECK(w <= previous * (1 + 1e-12));
        previous = w;
    }

    const Eigen::MatrixXcd U = random_unitary(10, 7);
    const NearFieldMatrix rotated{U * m.entries * U.adjoint(), m.band, m.x};
    const SharpEigensystem eig_u = sharp_eigensystem(rotated, EigenMethod::DirectHermitian);
    TestVector tv_u = tv;
    tv_u.components = U * tv.components;
    const double floor = 0.0;
    CHECK(indicator_single(eig_u, tv_u, floor) == Approx(indicator_single(eig, tv, floor)).epsilon(1e-6));
}

TEST_CASE("grid evaluator matches the direct indicator", "[spectral]")
{
    const FrequencyBand band = FrequencyBand::symmetric(6.0, 10);
    const Point x = from_spherical(2, 0.0, 2.0);
    for (EigenMethod method : {EigenMethod::PaperShortcut, EigenMethod::DirectHermitian}) {
        const SharpEigensystem eig = sharp_eigensystem(assemble(paper_record(x)), method);
        const double floor = default_lambda_floor(eig);
        const PicardEvaluator eval(eig, band, 1.0, 3.0, unit_speed, floor);
        for (const Point& y : {Point(0, 0, 0), Point(1, 1, 1), Point(-2, 0.5, 2), x}) {
            const double w = indicator_single(eig, test_vector(x, y, band, 1.0, 3.0, unit_speed), floor);
            CHECK(eval.indicator_at_radius((x - y).norm()) == Approx(w).epsilon(1e-12));
        }
    }
}

TEST_CASE("eigenvalue CSV dump", "[spectral][io]")
{
    const SharpEigensystem eig = sharp_eigensystem(assemble(paper_record({0, 0, -2})));
    const auto path = std::filesystem::temp_directory_path() / "orbit_imager_eigs.csv";
    write_eigenvalues_csv(path.string(), eig);
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    CHECK(line == "n,lambda");
    int rows = 0;
    while (std::getline(is, line)) {
        const double v = std::stod(line.substr(line.find(',') + 1));
        CHECK(v == eig.lambdas(rows));
        ++rows;
    }
    CHECK(rows == 10);
    std::filesystem::remove(path);
}
