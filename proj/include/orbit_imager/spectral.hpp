#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "forward.hpp"
#include "geometry.hpp"

namespace orbit_imager {

struct NearFieldMatrix
{
    Eigen::MatrixXcd entries;
    FrequencyBand band{0.0, 1.0, 1};
    Point x = Point::Zero();
};

// entry(n, m) = dw * u(kappa + tau_n - s_m), with tau_n - s_m = (n - m + 1/2) dw.
inline NearFieldMatrix assemble(const NearFieldRecord& record)
{
    if (!record.complete())
        throw AssemblyError("assemble: record needs " + std::to_string(record.band.N()) + " plus and " +
                            std::to_string(record.band.N() - 1) + " minus samples");
    const int N = record.band.N();
    const double dw = record.band.delta_omega();
    NearFieldMatrix out{Eigen::MatrixXcd(N, N), record.band, record.x};
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < N; ++m) {
            const int k = n - m;
            out.entries(n, m) = dw * (k >= 0 ? record.samples_plus[k] : record.samples_minus[-k - 1]);
        }
    }
    for (Eigen::Index i = 0; i < out.entries.size(); ++i) {
        const Complex v = out.entries.data()[i];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw AssemblyError("assemble: non-finite sample");
    }
    return out;
}

enum class EigenMethod { PaperShortcut, DirectHermitian };

inline const char* to_string(EigenMethod m)
{
    return m == EigenMethod::PaperShortcut ? "paper" : "direct";
}

struct SharpEigensystem
{
    Eigen::VectorXd lambdas;  // descending, >= 0
    Eigen::MatrixXcd vectors; // column k pairs with lambdas[k]
    EigenMethod method = EigenMethod::PaperShortcut;

    int size() const noexcept { return static_cast<int>(lambdas.size()); }
};

namespace detail {

// Unit 2-norm with the largest-magnitude component rotated onto the positive real axis.
inline Eigen::VectorXcd normalize_phase(Eigen::VectorXcd v)
{
    const double norm = v.norm();
    if (norm == 0.0)
        return v;
    v /= norm;
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    const Complex p = v(k);
    v *= std::conj(p) / std::abs(p);
    v(k) = Complex(v(k).real(), 0.0);
    return v;
}

inline SharpEigensystem sorted_system(const Eigen::VectorXd& lambdas, const Eigen::MatrixXcd& vectors,
                                      EigenMethod method)
{
    const Eigen::Index n = lambdas.size();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return lambdas(a) > lambdas(b); });
    SharpEigensystem out{Eigen::VectorXd(n), Eigen::MatrixXcd(n, n), method};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.lambdas(k) = std::max(0.0, lambdas(order[k]));
        out.vectors.col(k) = normalize_phase(vectors.col(order[k]));
    }
    return out;
}

inline Eigen::MatrixXcd hermitian_abs(const Eigen::MatrixXcd& h)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
        throw SpectralError("sharp_eigensystem: Hermitian eigensolver did not converge");
    return es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

// Eigen-system of |Re M| + |Im M| (Re M = (M + M*)/2, Im M = (M - M*)/2i).
// PaperShortcut takes eigenpairs of M itself with lambda = |Re| + |Im| of each eigenvalue,
// which is exact when the Hermitian and skew parts commute.
inline SharpEigensystem sharp_eigensystem(const NearFieldMatrix& matrix,
                                          EigenMethod method = EigenMethod::PaperShortcut)
{
    const Eigen::MatrixXcd& M = matrix.entries;
    if (!M.allFinite())
        throw SpectralError("sharp_eigensystem: matrix has non-finite entries");

    if (method == EigenMethod::PaperShortcut) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, true);
        if (es.info() != Eigen::Success)
            throw SpectralError("sharp_eigensystem: complex eigensolver did not converge");
        const Eigen::VectorXcd& ev = es.eigenvalues();
        Eigen::VectorXd lambdas(ev.size());
        for (Eigen::Index k = 0; k < ev.size(); ++k)
            lambdas(k) = std::abs(ev(k).real()) + std::abs(ev(k).imag());
        return detail::sorted_system(lambdas, es.eigenvectors(), method);
    }

    const Complex i(0.0, 1.0);
    const Eigen::MatrixXcd re = 0.5 * (M + M.adjoint());
    const Eigen::MatrixXcd im = (M - M.adjoint()) / (2.0 * i);
    Eigen::MatrixXcd sharp = detail::hermitian_abs(re) + detail::hermitian_abs(im);
    sharp = 0.5 * (sharp + sharp.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sharp);
    if (es.info() != Eigen::Success)
        throw SpectralError("sharp_eigensystem: Hermitian eigensolver did not converge");
    return detail::sorted_system(es.eigenvalues(), es.eigenvectors(), method);
}

// Every strictly positive eigenvalue enters the Picard sum.
inline double default_lambda_floor(const SharpEigensystem&)
{
    return 0.0;
}

struct TestVector
{
    Eigen::VectorXcd components;
    Point y = Point::Zero();
    Point x = Point::Zero();
};

namespace detail {

// (e^{i tau t_max} - e^{i tau t_min}) / (i tau T): the time average of e^{i tau t}.
inline Eigen::VectorXcd time_average_factors(const FrequencyBand& band, double t_min, double t_max)
{
    if (!(t_max > t_min))
        throw DomainError("test vector requires t_min < t_max");
    const FrequencySamples f = sample_frequencies(band);
    const double T = t_max - t_min;
    Eigen::VectorXcd out(band.N());
    for (int n = 0; n < band.N(); ++n) {
        const double tau = f.tau[n];
        out(n) = (std::polar(1.0, tau * t_max) - std::polar(1.0, tau * t_min)) / Complex(0.0, tau * T);
    }
    return out;
}

} // namespace detail

inline TestVector test_vector(const Point& x, const Point& y, const FrequencyBand& band, double t_min,
                              double t_max, const Medium& medium)
{
    const FrequencySamples f = sample_frequencies(band);
    const double r = (x - y).norm() / medium.c();
    TestVector tv{detail::time_average_factors(band, t_min, t_max), y, x};
    for (int n = 0; n < band.N(); ++n)
        tv.components(n) *= std::polar(1.0, f.tau[n] * r);
    return tv;
}

namespace detail {

inline double reciprocal_or_zero(double sum)
{
    if (!(sum > 0.0) || !std::isfinite(sum))
        return 0.0;
    const double w = 1.0 / sum;
    return std::isfinite(w) ? w : 0.0;
}

} // namespace detail

// Truncated Picard sum  sum_{lambda_n > floor} |<phi, psi_n>|^2 / lambda_n.
inline double picard_sum(const SharpEigensystem& eig, const Eigen::VectorXcd& phi, double lambda_floor)
{
    if (phi.size() != eig.size())
        throw DomainError("picard_sum: dimension mismatch between test vector and eigensystem");
    double sum = 0.0;
    for (int k = 0; k < eig.size(); ++k) {
        if (!(eig.lambdas(k) > lambda_floor))
            continue;
        // Eigen's dot conjugates its first argument, so this is sum_n phi_n conj(psi_n).
        const Complex ip = eig.vectors.col(k).dot(phi);
        sum += std::norm(ip) / eig.lambdas(k);
    }
    return sum;
}

inline double indicator_single(const SharpEigensystem& eig, const TestVector& tv, double lambda_floor)
{
    return detail::reciprocal_or_zero(picard_sum(eig, tv.components, lambda_floor));
}

// Grid-friendly evaluator: the test vector depends on y only through |x - y|.
class PicardEvaluator
{
public:
    PicardEvaluator(const SharpEigensystem& eig, const FrequencyBand& band, double t_min, double t_max,
                    const Medium& medium, double lambda_floor)
        : c_(medium.c()), tau_(sample_frequencies(band).tau)
    {
        if (eig.size() != band.N())
            throw DomainError("PicardEvaluator: eigensystem size differs from band N");
        const Eigen::VectorXcd base = detail::time_average_factors(band, t_min, t_max);
        for (int k = 0; k < eig.size(); ++k) {
            if (!(eig.lambdas(k) > lambda_floor))
                continue;
            // Row k holds conj(psi_k,n) * base_n, so <phi, psi_k> = sum_n row_n e^{i tau_n r/c}.
            Eigen::VectorXcd row = eig.vectors.col(k).conjugate().cwiseProduct(base);
            rows_.push_back(std::move(row));
            inv_lambdas_.push_back(1.0 / eig.lambdas(k));
        }
    }

    double sum_at_radius(double r) const
    {
        const Eigen::Index n = static_cast<Eigen::Index>(tau_.size());
        Eigen::VectorXcd phase(n);
        for (Eigen::Index i = 0; i < n; ++i)
            phase(i) = std::polar(1.0, tau_[i] * r / c_);
        double sum = 0.0;
        for (std::size_t k = 0; k < rows_.size(); ++k)
            sum += std::norm(rows_[k].cwiseProduct(phase).sum()) * inv_lambdas_[k];
        return sum;
    }

    double sum_at(const Point& x, const Point& y) const { return sum_at_radius((x - y).norm()); }

    double indicator_at_radius(double r) const { return detail::reciprocal_or_zero(sum_at_radius(r)); }

    std::size_t retained() const noexcept { return rows_.size(); }

private:
    double c_;
    std::vector<double> tau_;
    std::vector<Eigen::VectorXcd> rows_;
    std::vector<double> inv_lambdas_;
};

inline void write_eigenvalues_csv(const std::string& path, const SharpEigensystem& eig)
{
    std::ofstream os(path);
    if (!os)
        throw IoError(path + ": cannot open for writing");
    os << "n,lambda\n";
    char buf[40];
    for (int k = 0; k < eig.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", eig.lambdas(k));
        os << k + 1 << ',' << buf << '\n';
    }
    if (!os)
        throw IoError(path + ": write failed");
}

} // namespace orbit_imager
