#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace orbit_imager {

struct QuadratureNodes
{
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

// (P_n(x), P_n'(x)) by the three-term recurrence; n >= 1, |x| < 1.
inline std::pair<double, double> legendre_with_derivative(int n, double x)
{
    double p_prev = 1.0;
    double p = x;
    for (int k = 2; k <= n; ++k) {
        const double next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = next;
    }
    return {p, n * (x * p - p_prev) / (x * x - 1.0)};
}

} // namespace detail

// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
inline QuadratureNodes gauss_legendre(int n)
{
    if (n < 1)
        throw DomainError("gauss_legendre: need at least one node");

    QuadratureNodes rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    if (n == 1) {
        rule.weights[0] = 2.0;
        return rule;
    }
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = detail::legendre_with_derivative(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-16)
                break;
        }
        const double dp = detail::legendre_with_derivative(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

// Composite rule: `panels` equal panels on [a, b], `per_panel` Gauss nodes each.
inline QuadratureNodes composite_gauss_legendre(double a, double b, int panels, int per_panel)
{
    if (panels < 1)
        throw DomainError("composite_gauss_legendre: need at least one panel");
    const QuadratureNodes ref = gauss_legendre(per_panel);
    QuadratureNodes rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * per_panel);
    rule.weights.reserve(rule.nodes.capacity());
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double mid = lo + 0.5 * width;
        for (std::size_t k = 0; k < ref.size(); ++k) {
            rule.nodes.push_back(mid + 0.5 * width * ref.nodes[k]);
            rule.weights.push_back(0.5 * width * ref.weights[k]);
        }
    }
    return rule;
}

} // namespace orbit_imager
