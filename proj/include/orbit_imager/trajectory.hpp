#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/interpolators/cubic_hermite.hpp>

#include "errors.hpp"
#include "extremum.hpp"
#include "geometry.hpp"

namespace orbit_imager {

// a(t) = p0 + (t - t_min) / T * (p1 - p0). p0 == p1 is a stationary source.
struct LineSegment
{
    Point p0;
    Point p1;
};

// a(t) = center + radius * (cos(theta) u + sin(theta) v), theta linear in t from
// angle_begin (at t_min) to angle_end (at t_max). u, v orthonormal.
struct CircularArc
{
    Point center;
    double radius = 1.0;
    Vec3 u = Vec3::UnitX();
    Vec3 v = Vec3::UnitY();
    double angle_begin = 0.0;
    double angle_end = 0.0;
};

struct Knot
{
    double t = 0.0;
    Point position;
};

// C1 piecewise cubic Hermite through knots, monotone-preserving (Fritsch-Carlson) tangents
// chosen per coordinate.
class SampledOrbit
{
public:
    explicit SampledOrbit(std::vector<Knot> knots) : knots_(std::move(knots))
    {
        if (knots_.size() < 2)
            throw DomainError("sampled trajectory needs at least two knots");
        for (std::size_t i = 1; i < knots_.size(); ++i)
            if (!(knots_[i].t > knots_[i - 1].t))
                throw DomainError("sampled trajectory knots must be strictly increasing in t");

        std::vector<double> ts(knots_.size());
        std::transform(knots_.begin(), knots_.end(), ts.begin(), [](const Knot& k) { return k.t; });
        for (int axis = 0; axis < 3; ++axis) {
            std::vector<double> ys(knots_.size());
            std::transform(knots_.begin(), knots_.end(), ys.begin(),
                           [axis](const Knot& k) { return k.position[axis]; });
            std::vector<double> slopes = monotone_slopes(ts, ys);
            axes_[axis] = std::make_shared<Interpolator>(std::vector<double>(ts), std::move(ys),
                                                         std::move(slopes));
        }
    }

    const std::vector<Knot>& knots() const noexcept { return knots_; }

    Point position(double t) const
    {
        return {(*axes_[0])(t), (*axes_[1])(t), (*axes_[2])(t)};
    }

    Vec3 velocity(double t) const
    {
        return {axes_[0]->prime(t), axes_[1]->prime(t), axes_[2]->prime(t)};
    }

private:
    using Interpolator = boost::math::interpolators::cubic_hermite<std::vector<double>>;

    static std::vector<double> monotone_slopes(const std::vector<double>& x,
                                               const std::vector<double>& y)
    {
        const std::size_t n = x.size();
        std::vector<double> h(n - 1);
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x[i + 1] - x[i];
            delta[i] = (y[i + 1] - y[i]) / h[i];
        }
        std::vector<double> d(n, 0.0);
        if (n == 2) {
            d[0] = d[1] = delta[0];
            return d;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] > 0.0) {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        return d;
    }

    // Three-point end condition, clipped to preserve monotonicity.
    static double end_slope(double h0, double h1, double m0, double m1)
    {
        double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if (d * m0 <= 0.0)
            d = 0.0;
        else if (m0 * m1 <= 0.0 && std::abs(d) > std::abs(3.0 * m0))
            d = 3.0 * m0;
        return d;
    }

    std::vector<Knot> knots_;
    std::shared_ptr<Interpolator> axes_[3];
};

// Orbit a(t) on [t_min, t_max].
class Trajectory
{
public:
    using Kind = std::variant<LineSegment, CircularArc, SampledOrbit>;

    static Trajectory line(const Point& p0, const Point& p1, double t_min, double t_max)
    {
        return Trajectory(LineSegment{p0, p1}, t_min, t_max);
    }

    static Trajectory stationary(const Point& z, double t_min, double t_max)
    {
        return Trajectory(LineSegment{z, z}, t_min, t_max);
    }

    static Trajectory arc(CircularArc arc, double t_min, double t_max)
    {
        if (!(arc.radius > 0.0))
            throw DomainError("arc radius must be positive");
        if (std::abs(arc.u.norm() - 1.0) > 1e-12 || std::abs(arc.v.norm() - 1.0) > 1e-12 ||
            std::abs(arc.u.dot(arc.v)) > 1e-12)
            throw DomainError("arc axis frame must be orthonormal");
        return Trajectory(std::move(arc), t_min, t_max);
    }

    static Trajectory sampled(std::vector<Knot> knots)
    {
        SampledOrbit orbit(std::move(knots));
        const double lo = orbit.knots().front().t;
        const double hi = orbit.knots().back().t;
        return Trajectory(std::move(orbit), lo, hi);
    }

    double t_min() const noexcept { return t_min_; }
    double t_max() const noexcept { return t_max_; }
    double duration() const noexcept { return t_max_ - t_min_; }
    const Kind& kind() const noexcept { return kind_; }

    bool contains_time(double t) const noexcept { return t >= t_min_ && t <= t_max_; }

    Point position(double t) const
    {
        return std::visit(
            [&](const auto& k) -> Point {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, LineSegment>) {
                    const double s = (t - t_min_) / duration();
                    return k.p0 + s * (k.p1 - k.p0);
                } else if constexpr (std::is_same_v<K, CircularArc>) {
                    const double theta = arc_angle(k, t);
                    return k.center + k.radius * (std::cos(theta) * k.u + std::sin(theta) * k.v);
                } else {
                    return k.position(t);
                }
            },
            kind_);
    }

    Vec3 velocity(double t) const
    {
        return std::visit(
            [&](const auto& k) -> Vec3 {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, LineSegment>) {
                    return (k.p1 - k.p0) / duration();
                } else if constexpr (std::is_same_v<K, CircularArc>) {
                    const double theta = arc_angle(k, t);
                    const double rate = (k.angle_end - k.angle_begin) / duration();
                    return k.radius * rate * (-std::sin(theta) * k.u + std::cos(theta) * k.v);
                } else {
                    return k.velocity(t);
                }
            },
            kind_);
    }

private:
    Trajectory(Kind kind, double t_min, double t_max)
        : kind_(std::move(kind)), t_min_(t_min), t_max_(t_max)
    {
        if (!(t_min < t_max) || !std::isfinite(t_min) || !std::isfinite(t_max))
            throw DomainError("trajectory requires finite t_min < t_max");
    }

    double arc_angle(const CircularArc& k, double t) const
    {
        return k.angle_begin + (t - t_min_) / duration() * (k.angle_end - k.angle_begin);
    }

    Kind kind_;
    double t_min_;
    double t_max_;
};

// Source strength l(t). Construction verifies |l(t)| >= l0 > 0 on the emission window.
class Amplitude
{
public:
    static constexpr std::size_t kPositivitySamples = 4096;

    static Amplitude constant(double value, double t_min, double t_max)
    {
        return Amplitude({value}, t_min, t_max);
    }

    // coefficients[k] multiplies t^k.
    static Amplitude polynomial(std::vector<double> coefficients, double t_min, double t_max)
    {
        if (coefficients.empty())
            throw DomainError("amplitude polynomial needs at least one coefficient");
        return Amplitude(std::move(coefficients), t_min, t_max);
    }

    double operator()(double t) const noexcept
    {
        double acc = 0.0;
        for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it)
            acc = acc * t + *it;
        return acc;
    }

    bool is_constant() const noexcept { return coefficients_.size() == 1; }
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }
    double lower_bound() const noexcept { return lower_bound_; }

    Amplitude scaled(double factor) const
    {
        std::vector<double> c = coefficients_;
        for (double& v : c)
            v *= factor;
        return Amplitude(std::move(c), t_min_, t_max_);
    }

private:
    Amplitude(std::vector<double> coefficients, double t_min, double t_max)
        : coefficients_(std::move(coefficients)), t_min_(t_min), t_max_(t_max)
    {
        if (!(t_min < t_max))
            throw DomainError("amplitude window requires t_min < t_max");
        double lowest = std::numeric_limits<double>::infinity();
        double first_sign = 0.0;
        for (std::size_t i = 0; i < kPositivitySamples; ++i) {
            const double t = t_min + (t_max - t_min) * static_cast<double>(i) / (kPositivitySamples - 1);
            const double v = (*this)(t);
            if (!std::isfinite(v))
                throw DomainError("amplitude is not finite on the emission window");
            if (first_sign == 0.0)
                first_sign = (v > 0.0) ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
            if (v * first_sign <= 0.0)
                throw DomainError("amplitude must satisfy |l(t)| >= l0 > 0 (vanishes or changes sign)");
            lowest = std::min(lowest, std::abs(v));
        }
        lower_bound_ = lowest;
    }

    std::vector<double> coefficients_;
    double t_min_;
    double t_max_;
    double lower_bound_ = 0.0;
};

// ---------------------------------------------------------------------------
// Orbit geometry relative to an observation point x.
// ---------------------------------------------------------------------------

struct PhaseExtrema
{
    double xi_min = 0.0;
    double xi_max = 0.0;
    double argmin_t = 0.0;
    double argmax_t = 0.0;
    double margin = 0.0; // xi_max - xi_min - (t_max - t_min)
};

enum class Visibility { Observable, NonObservable };

struct Observability
{
    Visibility visibility = Visibility::NonObservable;
    double margin = 0.0;

    bool observable() const noexcept { return visibility == Visibility::Observable; }
};

// Radii of {y : r_lo <= |x - y| <= r_hi} centred at the observation point.
struct AnnulusBounds
{
    Point center;
    double r_lo = 0.0;
    double r_hi = 0.0;
    bool empty = false;

    double width() const noexcept { return r_hi - r_lo; }
    bool contains_radius(double r, double slack = 0.0) const noexcept
    {
        return !empty && r >= r_lo - slack && r <= r_hi + slack;
    }
};

inline Point eval_orbit(const Trajectory& traj, double t)
{
    if (!traj.contains_time(t))
        throw DomainError("eval_orbit: t outside [t_min, t_max]");
    return traj.position(t);
}

// h(t) = t + |x - a(t)| / c.
inline double phase(const Trajectory& traj, const Medium& medium, const Point& x, double t)
{
    const double d = (x - eval_orbit(traj, t)).norm();
    if (d < kGeometryEpsilon)
        throw SingularGeometryError("observation point lies on the trajectory");
    return t + d / medium.c();
}

// inf/sup over the orbit of |x - a(t)|.
inline AnnulusBounds enclosing_annulus(const Trajectory& traj, const Point& x,
                                       double tol = kDefaultTimeTolerance,
                                       std::size_t samples = kDefaultExtremumSamples)
{
    const ExtremumSearch s = extremize([&](double t) { return (x - traj.position(t)).norm(); },
                                       traj.t_min(), traj.t_max(), samples, tol);
    if (s.min < kGeometryEpsilon)
        throw SingularGeometryError("observation point lies on the trajectory");
    return AnnulusBounds{x, s.min, s.max, false};
}

namespace detail {

inline void require_off_trajectory(const Trajectory& traj, const Point& x)
{
    (void)enclosing_annulus(traj, x);
}

} // namespace detail

inline PhaseExtrema phase_extrema(const Trajectory& traj, const Medium& medium, const Point& x,
                                  double tol = kDefaultTimeTolerance,
                                  std::size_t samples = kDefaultExtremumSamples)
{
    detail::require_off_trajectory(traj, x);
    const double c = medium.c();
    const ExtremumSearch s = extremize(
        [&](double t) { return t + (x - traj.position(t)).norm() / c; }, traj.t_min(),
        traj.t_max(), samples, tol);
    PhaseExtrema out;
    out.xi_min = s.min;
    out.xi_max = s.max;
    out.argmin_t = s.argmin;
    out.argmax_t = s.argmax;
    out.margin = s.max - s.min - traj.duration();
    return out;
}

// Observable iff xi_max - xi_min >= T, with |margin| <= tol counted as observable.
inline Observability classify_observable(const Trajectory& traj, const Medium& medium,
                                         const Point& x, double tol = kDefaultTimeTolerance)
{
    const PhaseExtrema e = phase_extrema(traj, medium, x, tol);
    return {e.margin >= -tol ? Visibility::Observable : Visibility::NonObservable, e.margin};
}

inline AnnulusBounds annulus_from_extrema(const Trajectory& traj, const Medium& medium,
                                          const Point& x, const PhaseExtrema& e,
                                          double tol = kDefaultTimeTolerance)
{
    AnnulusBounds a;
    a.center = x;
    a.r_lo = medium.c() * (e.xi_min - traj.t_min());
    a.r_hi = medium.c() * (e.xi_max - traj.t_max());
    if (e.margin >= -tol && a.r_lo > a.r_hi) {
        // Observable by the tie-break but numerically inverted: collapse to a sphere.
        const double mid = 0.5 * (a.r_lo + a.r_hi);
        a.r_lo = a.r_hi = mid;
    }
    a.empty = a.r_lo > a.r_hi;
    return a;
}

// {y : c (xi_min - t_min) <= |x - y| <= c (xi_max - t_max)}.
inline AnnulusBounds annulus(const Trajectory& traj, const Medium& medium, const Point& x,
                             double tol = kDefaultTimeTolerance)
{
    return annulus_from_extrema(traj, medium, x, phase_extrema(traj, medium, x, tol), tol);
}

// (x - a(t)) . a'(t) <= tol on a dense sample of the emission window.
inline bool monotone_noncontracting(const Trajectory& traj, const Medium& medium, const Point& x,
                                    double tol = kDefaultTimeTolerance,
                                    std::size_t samples = kDefaultExtremumSamples)
{
    (void)medium;
    detail::require_off_trajectory(traj, x);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = (i + 1 == samples)
            ? traj.t_max()
            : traj.t_min() + traj.duration() * static_cast<double>(i) / (samples - 1);
        if ((x - traj.position(t)).dot(traj.velocity(t)) > tol)
            return false;
    }
    return true;
}

// inf_t |x - b(t)| > sup_t |x - a(t)| + c T. Both orbits must share the emission window.
inline bool ranges_disjoint_sufficient(const Trajectory& a, const Trajectory& b,
                                       const Medium& medium, const Point& x)
{
    if (a.t_min() != b.t_min() || a.t_max() != b.t_max())
        throw DomainError("ranges_disjoint_sufficient: trajectories must share [t_min, t_max]");
    const AnnulusBounds ea = enclosing_annulus(a, x);
    const AnnulusBounds eb = enclosing_annulus(b, x);
    return eb.r_lo > ea.r_hi + medium.c() * a.duration();
}

} // namespace orbit_imager
