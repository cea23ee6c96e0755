// specfun.hpp
//
// Special functions used by the welfare estimators. Everything here follows the
// 1/pi-normalized convention:
//
//   sinc(x)  = sin(x) / (pi x)            sinc(0) = 1/pi
//   Si(x)    = int_0^x sin(t)/t dt
//   Csinc(x) = int_{-inf}^x sinc(t) dt = 1/2 + Si(x)/pi
//
// All functions are pure and reentrant.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <iterator>
#include <numbers>
#include <string>

#include "assure/detail/si_tables.hpp"
#include "assure/error.hpp"

namespace assure::specfun {

inline constexpr double pi = std::numbers::pi;
inline constexpr double inv_pi = std::numbers::inv_pi;
inline constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;

// Numerical controls for the generic sine-integral path. The default-argument
// overloads use precomputed tables (detail/si_tables.hpp) with the same regime
// split and are accurate to about 1e-16 absolute.
struct AccuracySpec {
    double abs_tol = 1e-12;
    // |x| at or below this uses the Maclaurin series; above it the auxiliary
    // functions f, g.
    double series_asymptotic_switch = 4.0;
    // f, g come from their asymptotic series at or above this magnitude and from
    // the continued fraction for E1(ix) between the two switch points.
    double asymptotic_series_from = 40.0;

    void validate() const {
        if (!(abs_tol > 0.0) || !(series_asymptotic_switch > 0.0) ||
            !(asymptotic_series_from >= series_asymptotic_switch))
            throw PreconditionError("AccuracySpec requires abs_tol > 0 and positive, ordered switch points");
    }
};

namespace detail {

inline void require_finite(double x, const char* fn) {
    if (!std::isfinite(x))
        throw DomainError(std::string(fn) + ": non-finite argument");
}

// Below this magnitude sinc and its derivatives use Taylor polynomials.
inline constexpr double taylor_cutoff = 1e-3;

// Auxiliary functions, Si(x) = pi/2 - f(x) cos x - g(x) sin x for x > 0.
struct FG {
    double f;
    double g;
};

// Si(x) = sum_k (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
inline double si_series_generic(double x, double tol) {
    const double x2 = x * x;
    double term = x; // (-1)^k x^(2k+1) / (2k+1)!
    double sum = x;
    for (int k = 1; k < 200; ++k) {
        const double a = 2.0 * k;
        term *= -x2 / (a * (a + 1.0));
        const double contrib = term / (a + 1.0);
        sum += contrib;
        if (std::abs(contrib) <= 1e-17 * std::abs(sum) || std::abs(contrib) < 1e-6 * tol)
            break;
    }
    return sum;
}

// Modified Lentz evaluation of
//   e^z E1(z) = 1 / (z + 1 - 1^2 / (z + 3 - 2^2 / (z + 5 - ...)))
// at z = ix, where e^{ix} E1(ix) = g(x) - i f(x).
inline FG fg_continued_fraction(double x) {
    using cd = std::complex<double>;
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    cd b(1.0, x);
    cd c(1.0 / tiny, 0.0);
    cd d = 1.0 / b;
    cd h = d;
    for (int i = 2; i < 1000; ++i) {
        const double a = -static_cast<double>(i - 1) * static_cast<double>(i - 1);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const cd del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps)
            break;
    }
    return {-h.imag(), h.real()};
}

// f(x) ~ (1/x)   sum (-1)^k (2k)!   / x^(2k)
// g(x) ~ (1/x^2) sum (-1)^k (2k+1)! / x^(2k)
// summed up to the smallest term.
inline FG fg_asymptotic_generic(double x) {
    const double inv_x2 = 1.0 / (x * x);
    double tf = 1.0, tg = 1.0;
    double sf = 1.0, sg = 1.0;
    for (int k = 1; k < 400; ++k) {
        const double nf = tf * -(2.0 * k - 1.0) * (2.0 * k) * inv_x2;
        const double ng = tg * -(2.0 * k) * (2.0 * k + 1.0) * inv_x2;
        if (std::abs(nf) >= std::abs(tf) || std::abs(ng) >= std::abs(tg))
            break;
        tf = nf;
        tg = ng;
        sf += tf;
        sg += tg;
        if (std::abs(tf) < 1e-17 && std::abs(tg) < 1e-17)
            break;
    }
    return {sf / x, sg * inv_x2};
}

// Joint Clenshaw recurrence for the two expansions of one piece.
inline FG clenshaw_pair(const AuxPiece& p, double x) {
    const double t = (2.0 * x - p.lo - p.hi) / (p.hi - p.lo);
    const double t2 = 2.0 * t;
    double f1 = 0.0, f2 = 0.0, g1 = 0.0, g2 = 0.0;
    for (int k = p.terms - 1; k > 0; --k) {
        const double f0 = t2 * f1 + (p.f[k] - f2);
        const double g0 = t2 * g1 + (p.g[k] - g2);
        f2 = f1;
        f1 = f0;
        g2 = g1;
        g1 = g0;
    }
    return {t * f1 + (p.f[0] - f2), t * g1 + (p.g[0] - g2)};
}

template <std::size_t N>
inline double horner(const double (&c)[N], double x) {
    double acc = c[N - 1];
    for (std::size_t k = N - 1; k > 0; --k)
        acc = acc * x + c[k - 1];
    return acc;
}

// (2k)! and (2k+1)! for the fixed-length asymptotic sums at x >= 40, where the
// smallest retained term is below 1e-16.
inline constexpr int asymptotic_terms = 20;

struct AsymptoticCoefficients {
    double f[asymptotic_terms];
    double g[asymptotic_terms];
};

inline constexpr AsymptoticCoefficients asymptotic_coefficients = [] {
    AsymptoticCoefficients c{};
    double ff = 1.0, fg = 1.0;
    for (int k = 0; k < asymptotic_terms; ++k) {
        c.f[k] = ff;
        c.g[k] = fg;
        ff *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
        fg *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
    }
    return c;
}();

// Maclaurin polynomial in y = x^2, split into even and odd powers of y so the
// two Horner chains run independently.
inline double si_series_table(double x) {
    constexpr std::size_t n = std::size(si_series);
    const double y = x * x;
    const double y2 = y * y;
    double even = 0.0, odd = 0.0;
    for (std::size_t j = n; j-- > 0;) {
        if (j % 2 == 0)
            even = even * y2 + si_series[j];
        else
            odd = odd * y2 + si_series[j];
    }
    return x * (even + y * odd);
}

// Number of asymptotic terms keeping the first omitted term below 1e-17.
inline int asymptotic_terms_for(double x) {
    if (x >= 1000.0)
        return 5;
    if (x >= 100.0)
        return 9;
    if (x >= 60.0)
        return 12;
    return asymptotic_terms;
}

inline FG fg_tables(double x) {
    const double inv_x = 1.0 / x;
    if (x < 40.0) {
        for (const AuxPiece& p : aux_pieces) {
            if (x < p.hi) {
                const FG c = clenshaw_pair(p, x);
                return {c.f * inv_x, c.g * inv_x * inv_x};
            }
        }
    }
    const double s = -inv_x * inv_x;
    double accf = 0.0, accg = 0.0;
    for (int k = asymptotic_terms_for(x); k-- > 0;) {
        accf = accf * s + asymptotic_coefficients.f[k];
        accg = accg * s + asymptotic_coefficients.g[k];
    }
    return {accf * inv_x, accg * inv_x * inv_x};
}

} // namespace detail

/// sin(x) / (pi x), with sinc(0) = 1/pi.
inline double sinc(double x) {
    detail::require_finite(x, "sinc");
    if (std::abs(x) < detail::taylor_cutoff) {
        const double x2 = x * x;
        return inv_pi * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)));
    }
    return std::sin(x) / (pi * x);
}

/// (x cos x - sin x) / (pi x^2), with value 0 at x = 0.
inline double sinc_prime(double x) {
    detail::require_finite(x, "sinc_prime");
    if (std::abs(x) < detail::taylor_cutoff) {
        const double x2 = x * x;
        return inv_pi * x * (-1.0 / 3.0 + x2 * (1.0 / 30.0 - x2 / 840.0));
    }
    return (x * std::cos(x) - std::sin(x)) / (pi * x * x);
}

/// (2 sin x - 2x cos x - x^2 sin x) / (pi x^3), with value -1/(3 pi) at x = 0.
inline double sinc_double_prime(double x) {
    detail::require_finite(x, "sinc_double_prime");
    if (std::abs(x) < detail::taylor_cutoff) {
        const double x2 = x * x;
        return inv_pi * (-1.0 / 3.0 + x2 * (1.0 / 10.0 - x2 * (1.0 / 168.0 - x2 / 6480.0)));
    }
    const double s = std::sin(x), c = std::cos(x);
    return (2.0 * s - 2.0 * x * c - x * x * s) / (pi * x * x * x);
}

/// Si(x) = int_0^x sin(t)/t dt. Odd; tends to +-pi/2.
inline double sine_integral(double x) {
    detail::require_finite(x, "sine_integral");
    const double ax = std::abs(x);
    double v;
    if (ax <= 4.0) {
        v = detail::si_series_table(ax);
    } else {
        const detail::FG fg = detail::fg_tables(ax);
        v = 0.5 * pi - fg.f * std::cos(ax) - fg.g * std::sin(ax);
    }
    return x < 0.0 ? -v : v;
}

/// Si(x) through the generic series / continued-fraction / asymptotic path with
/// caller-chosen switch points.
inline double sine_integral(double x, const AccuracySpec& acc) {
    detail::require_finite(x, "sine_integral");
    acc.validate();
    const double ax = std::abs(x);
    double v;
    if (ax <= acc.series_asymptotic_switch) {
        v = detail::si_series_generic(ax, acc.abs_tol);
    } else {
        const detail::FG fg = ax >= acc.asymptotic_series_from ? detail::fg_asymptotic_generic(ax)
                                                               : detail::fg_continued_fraction(ax);
        v = 0.5 * pi - fg.f * std::cos(ax) - fg.g * std::sin(ax);
    }
    return x < 0.0 ? -v : v;
}

/// 1/2 + Si(x)/pi. Not monotone.
inline double cumulative_sinc(double x) {
    return 0.5 + sine_integral(x) * inv_pi;
}

inline double cumulative_sinc(double x, const AccuracySpec& acc) {
    return 0.5 + sine_integral(x, acc) * inv_pi;
}

/// sinc(x) and Csinc(x) together, sharing the trigonometric evaluations.
struct SincPair {
    double sinc;
    double csinc;
};

inline SincPair sinc_and_cumulative(double x) {
    detail::require_finite(x, "sinc_and_cumulative");
    const double ax = std::abs(x);
    if (ax <= 4.0) {
        const double si = detail::si_series_table(ax);
        const double sc = ax < detail::taylor_cutoff ? sinc(ax) : std::sin(ax) / (pi * ax);
        return {sc, 0.5 + (x < 0.0 ? -si : si) * inv_pi};
    }
    const double s = std::sin(ax), c = std::cos(ax);
    const detail::FG fg = detail::fg_tables(ax);
    const double si = 0.5 * pi - fg.f * c - fg.g * s;
    return {s / (pi * ax), 0.5 + (x < 0.0 ? -si : si) * inv_pi};
}

inline double normal_pdf(double x) {
    detail::require_finite(x, "normal_pdf");
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
    detail::require_finite(x, "normal_cdf");
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
}

/// Inverse of normal_cdf on (0, 1).
///
/// Acklam's rational approximation (relative error about 1.2e-9) followed by one
/// Halley step against erfc, which brings the result to near machine precision.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("normal_quantile: probability must lie in (0, 1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

} // namespace assure::specfun
