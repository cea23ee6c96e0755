// quadrature.hpp
//
// Gauss-Hermite rule for Gaussian expectations E f(mu + sigma Z), Z ~ N(0, 1).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace assure {

template <std::size_t N>
struct GaussHermiteRule {
    std::array<double, N> nodes{};   // roots of the physicists' H_N
    std::array<double, N> weights{}; // for weight exp(-x^2)
};

namespace detail {

// Newton iteration on the orthonormal Hermite recurrence with the classical
// asymptotic initial guesses.
template <std::size_t N>
GaussHermiteRule<N> build_gauss_hermite() {
    GaussHermiteRule<N> rule;
    constexpr int n = static_cast<int>(N);
    const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * rule.nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * rule.nodes[1];
        else
            z = 2.0 * z - rule.nodes[static_cast<std::size_t>(i - 2)];
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z)))
                break;
        }
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = z;
        rule.nodes[hi] = -z;
        rule.weights[lo] = rule.weights[hi] = 2.0 / (pp * pp);
    }
    return rule;
}

} // namespace detail

template <std::size_t N = 64>
const GaussHermiteRule<N>& gauss_hermite() {
    static const GaussHermiteRule<N> rule = detail::build_gauss_hermite<N>();
    return rule;
}

/// E f(mu + sigma Z) for Z ~ N(0, 1) with the N-point rule.
template <std::size_t N = 64, class F>
double gaussian_expectation(F&& f, double mu, double sigma) {
    const auto& rule = gauss_hermite<N>();
    const double scale = std::numbers::sqrt2 * sigma;
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        acc += rule.weights[i] * f(mu + scale * rule.nodes[i]);
    return acc / std::sqrt(std::numbers::pi);
}

} // namespace assure
