// estimators.hpp
//
// Welfare estimators for threshold rules: the sinc-kernel estimator (ASSURE),
// the coupled-bootstrap Gaussian-kernel estimator, the exact Poisson estimator,
// plus the simulation-only oracle welfare and realized utility.
//
// Every estimator depends on the rule only through the per-unit thresholds.
// Means and standard errors come from a fixed pairwise tree over unit index, so
// values are bit-reproducible.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "assure/classes.hpp"
#include "assure/error.hpp"
#include "assure/model.hpp"
#include "assure/quadrature.hpp"
#include "assure/specfun.hpp"

namespace assure {

struct WelfareEstimate {
    double value = 0.0;
    double std_error = 0.0; // sqrt(sum (w_i - mean)^2) / n
    std::size_t n = 0;
    double h = 0.0;         // bandwidth (ASSURE) or epsilon (coupled bootstrap); 0 for exact estimators
};

enum class Method { assure, cb, poisson };

inline const char* to_string(Method m) {
    switch (m) {
    case Method::assure: return "assure";
    case Method::cb: return "cb";
    case Method::poisson: return "poisson";
    }
    return "?";
}

inline Method method_from_string(const std::string& s) {
    if (s == "assure")
        return Method::assure;
    if (s == "cb")
        return Method::cb;
    if (s == "poisson")
        return Method::poisson;
    throw PreconditionError("unknown method '" + s + "' (expected assure, cb or poisson)", "unknown_method");
}

struct EstimatorOptions {
    Method method = Method::assure;
    std::optional<double> h;   // default auto_bandwidth(n)
    std::optional<double> eps; // default n^{-1/5}
};

// ---------------------------------------------------------------------------
// Pairwise moments

struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0; // sum of squared deviations from the mean
};

inline Moments combine(const Moments& a, const Moments& b) {
    if (a.count == 0)
        return b;
    if (b.count == 0)
        return a;
    const double na = static_cast<double>(a.count), nb = static_cast<double>(b.count);
    const double n = na + nb;
    const double d = b.mean - a.mean;
    return {a.count + b.count, a.mean + d * (nb / n), a.m2 + b.m2 + d * d * (na * nb / n)};
}

/// Moments of w by recursive halving down to blocks of at most 16, where a
/// two-pass sum is used.
inline Moments pairwise_moments(std::span<const double> w) {
    constexpr std::size_t leaf = 16;
    if (w.size() <= leaf) {
        Moments m;
        m.count = w.size();
        if (w.empty())
            return m;
        double s = 0.0;
        for (double v : w)
            s += v;
        m.mean = s / static_cast<double>(w.size());
        for (double v : w)
            m.m2 += (v - m.mean) * (v - m.mean);
        return m;
    }
    const std::size_t half = w.size() / 2;
    return combine(pairwise_moments(w.first(half)), pairwise_moments(w.subspan(half)));
}

inline WelfareEstimate summarize(std::span<const double> w, double h) {
    const Moments m = pairwise_moments(w);
    const double n = static_cast<double>(m.count);
    return {m.mean, std::sqrt(m.m2) / n, m.count, h};
}

// ---------------------------------------------------------------------------
// Summands

inline void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw PreconditionError(std::string(what) + " must be positive and finite");
}

/// w_h(y; z, delta) = (y - k) Csinc(u) - (sigma / h) sinc(u),  u = (y - delta) / (sigma h).
inline double assure_summand(double y, const Context& z, double delta, double h) {
    require_positive(h, "bandwidth h");
    const double u = (y - delta) / (z.sigma * h);
    const auto p = specfun::sinc_and_cumulative(u);
    return (y - z.cost) * p.csinc - z.sigma / h * p.sinc;
}

namespace detail {

// assure_summand without argument checks, for validated dataset loops.
inline double assure_term(double y, double sigma, double cost, double delta, double h) {
    const double u = (y - delta) / (sigma * h);
    const auto p = specfun::sinc_and_cumulative(u);
    return (y - cost) * p.csinc - sigma / h * p.sinc;
}

} // namespace detail

/// The same summand written through the sine integral:
/// (y - k)/2 + (y - k) Si(u) / pi - (sigma / h) sinc(u).
inline double assure_summand_psi(double y, const Context& z, double delta, double h) {
    require_positive(h, "bandwidth h");
    const double u = (y - delta) / (z.sigma * h);
    const double r = y - z.cost;
    return 0.5 * r + r * specfun::sine_integral(u) * specfun::inv_pi - z.sigma / h * specfun::sinc(u);
}

/// First and second derivatives of the summand in the threshold.
struct SummandSlopes {
    double d1 = 0.0;
    double d2 = 0.0;
};

inline SummandSlopes assure_summand_slopes(double y, const Context& z, double delta, double h) {
    const double sh = z.sigma * h;
    const double u = (y - delta) / sh;
    const double r = y - z.cost;
    const double s1 = specfun::sinc_prime(u);
    return {-r / sh * specfun::sinc(u) + s1 / (h * h),
            r / (sh * sh) * s1 - specfun::sinc_double_prime(u) / (sh * h * h)};
}

/// (y - k) Phi(v) - (sigma / eps) phi(v),  v = (y - delta) / (eps sigma).
inline double cb_summand(double y, const Context& z, double delta, double eps) {
    require_positive(eps, "coupled-bootstrap eps");
    const double v = (y - delta) / (eps * z.sigma);
    return (y - z.cost) * specfun::normal_cdf(v) - z.sigma / eps * specfun::normal_pdf(v);
}

/// y 1{y >= c + 1} - k 1{y >= c}.
inline double poisson_summand(double y, double k, std::int64_t c) {
    const double cd = static_cast<double>(c);
    return (y >= cd + 1.0 ? y : 0.0) - (y >= cd ? k : 0.0);
}

inline double default_cb_eps(std::size_t n) { return std::pow(static_cast<double>(n), -0.2); }

// ---------------------------------------------------------------------------
// Dataset-level estimators

namespace detail {

inline void require_mode(const Dataset& data, Likelihood mode, const char* what) {
    if (data.mode() != mode)
        throw PreconditionError(std::string(what) + " requires a " + to_string(mode) + " dataset, got " +
                                    to_string(data.mode()),
                                "mode_mismatch");
}

inline void require_length(const Dataset& data, std::span<const double> delta) {
    if (delta.size() != data.size())
        throw PreconditionError("threshold vector length does not match the dataset", "length_mismatch");
}

} // namespace detail

inline WelfareEstimate assure_from_thresholds(const Dataset& data, std::span<const double> delta,
                                              std::optional<double> h = std::nullopt) {
    detail::require_mode(data, Likelihood::gaussian, "assure");
    detail::require_length(data, delta);
    const double bw = h ? *h : auto_bandwidth(data.size()).h;
    require_positive(bw, "bandwidth h");
    const auto y = data.y();
    const auto sigma = data.sigma();
    const auto cost = data.cost();
    std::vector<double> w(data.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = detail::assure_term(y[i], sigma[i], cost[i], delta[i], bw);
    return summarize(w, bw);
}

inline WelfareEstimate cb_from_thresholds(const Dataset& data, std::span<const double> delta,
                                          std::optional<double> eps = std::nullopt) {
    detail::require_mode(data, Likelihood::gaussian, "cb");
    detail::require_length(data, delta);
    const double e = eps ? *eps : default_cb_eps(data.size());
    require_positive(e, "coupled-bootstrap eps");
    std::vector<double> w(data.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = cb_summand(data.y()[i], context_of(data, i), delta[i], e);
    return summarize(w, e);
}

inline WelfareEstimate poisson_from_thresholds(const Dataset& data, std::span<const double> delta) {
    detail::require_mode(data, Likelihood::poisson, "poisson_assure");
    detail::require_length(data, delta);
    std::vector<double> w(data.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = poisson_summand(data.y()[i], data.cost()[i], integer_cutoff(delta[i]));
    return summarize(w, 0.0);
}

inline WelfareEstimate assure_estimate(const Dataset& data, const DecisionFamily& family,
                                       std::span<const double> beta, std::optional<double> h = std::nullopt) {
    return assure_from_thresholds(data, thresholds(data, family, beta), h);
}

inline WelfareEstimate cb_estimate(const Dataset& data, const DecisionFamily& family, std::span<const double> beta,
                                   std::optional<double> eps = std::nullopt) {
    return cb_from_thresholds(data, thresholds(data, family, beta), eps);
}

inline WelfareEstimate poisson_assure(const Dataset& data, const DecisionFamily& family,
                                      std::span<const double> beta) {
    return poisson_from_thresholds(data, thresholds(data, family, beta));
}

inline WelfareEstimate estimate_from_thresholds(const Dataset& data, std::span<const double> delta,
                                                const EstimatorOptions& opt) {
    switch (opt.method) {
    case Method::assure: return assure_from_thresholds(data, delta, opt.h);
    case Method::cb: return cb_from_thresholds(data, delta, opt.eps);
    case Method::poisson: return poisson_from_thresholds(data, delta);
    }
    return {};
}

inline WelfareEstimate estimate(const Dataset& data, const DecisionFamily& family, std::span<const double> beta,
                                const EstimatorOptions& opt = {}) {
    return estimate_from_thresholds(data, thresholds(data, family, beta), opt);
}

/// Gradient (and for order 2 the row-major Hessian) of the ASSURE estimate in beta.
struct WelfareDerivative {
    std::size_t dim = 0;
    std::vector<double> gradient;
    std::vector<double> hessian;
};

inline WelfareDerivative assure_derivative(const Dataset& data, const DecisionFamily& family,
                                           std::span<const double> beta, int order,
                                           std::optional<double> h = std::nullopt) {
    if (!family.differentiable())
        throw UnsupportedError("finite families have no derivatives in beta");
    if (order != 1 && order != 2)
        throw PreconditionError("derivative order must be 1 or 2");
    detail::require_mode(data, Likelihood::gaussian, "assure_derivative");
    family.check_beta(beta);
    const double bw = h ? *h : auto_bandwidth(data.size()).h;
    require_positive(bw, "bandwidth h");
    const std::size_t d = family.dim();
    WelfareDerivative out{d, std::vector<double>(d, 0.0), order == 2 ? std::vector<double>(d * d, 0.0)
                                                                     : std::vector<double>{}};
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Context z = context_of(data, i);
        if (i == 0)
            family.check_context(z);
        const ThresholdJet jet = family.jet(z, beta, order);
        const SummandSlopes s = assure_summand_slopes(data.y()[i], z, jet.value, bw);
        for (std::size_t a = 0; a < d; ++a)
            out.gradient[a] += s.d1 * jet.gradient[a];
        if (order == 2)
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    out.hessian[a * d + b] += s.d2 * jet.gradient[a] * jet.gradient[b] + s.d1 * jet.hessian[a * d + b];
    }
    const double n = static_cast<double>(data.size());
    for (double& g : out.gradient)
        g /= n;
    for (double& v : out.hessian)
        v /= n;
    return out;
}

// ---------------------------------------------------------------------------
// Oracles (simulation only)

/// P(Y >= c) for Y ~ Poisson(mu), summing the pmf upward from c until terms
/// drop below 1e-16 of the running sum.
inline double poisson_tail(double mu, std::int64_t c) {
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw DomainError("poisson mean must be non-negative and finite");
    if (c <= 0)
        return 1.0;
    if (mu == 0.0)
        return 0.0;
    const double cd = static_cast<double>(c);
    double pmf = std::exp(-mu + cd * std::log(mu) - std::lgamma(cd + 1.0));
    double sum = 0.0;
    for (double k = cd;; k += 1.0) {
        sum += pmf;
        pmf *= mu / (k + 1.0);
        if (k + 1.0 > mu && pmf < 1e-16 * sum)
            break;
        if (pmf == 0.0)
            break;
    }
    return std::min(sum, 1.0);
}

inline double oracle_welfare_from_thresholds(const Dataset& data, const GroundTruth& truth,
                                             std::span<const double> delta) {
    truth.check_against(data);
    detail::require_length(data, delta);
    std::vector<double> w(data.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double gain = truth.mu[i] - data.cost()[i];
        if (data.mode() == Likelihood::gaussian)
            w[i] = gain * specfun::normal_cdf((truth.mu[i] - delta[i]) / data.sigma()[i]);
        else
            w[i] = gain * poisson_tail(truth.mu[i], integer_cutoff(delta[i]));
    }
    return pairwise_moments(w).mean;
}

/// W(beta) = (1/n) sum (mu_i - k_i) P(unit i selected).
inline double oracle_welfare(const Dataset& data, const GroundTruth& truth, const DecisionFamily& family,
                             std::span<const double> beta) {
    return oracle_welfare_from_thresholds(data, truth, thresholds(data, family, beta));
}

inline double utility_of_decisions(const Dataset& data, const GroundTruth& truth, std::span<const int> select) {
    truth.check_against(data);
    if (select.size() != data.size())
        throw PreconditionError("decision vector length does not match the dataset", "length_mismatch");
    std::vector<double> w(data.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = select[i] ? truth.mu[i] - data.cost()[i] : 0.0;
    return pairwise_moments(w).mean;
}

/// u(beta) = (1/n) sum 1(unit i selected)(mu_i - k_i) on the realized y.
inline double realized_utility(const Dataset& data, const GroundTruth& truth, const DecisionFamily& family,
                               std::span<const double> beta) {
    const auto select = decisions(data, family, beta);
    return utility_of_decisions(data, truth, select);
}

/// |mu - k| h^2 exp(-1 / (2 h^2)).
inline double assure_bias_bound(double mu, double k, double h) {
    return std::abs(mu - k) * h * h * std::exp(-0.5 / (h * h));
}

/// E w_h(Y; z, delta) for Y ~ N(mu, sigma^2) by 64-point Gauss-Hermite.
inline double expected_assure_summand(double mu, const Context& z, double delta, double h) {
    return gaussian_expectation([&](double y) { return assure_summand(y, z, delta, h); }, mu, z.sigma);
}

/// E cb(Y; z, delta, eps) for Y ~ N(mu, sigma^2), in closed form:
/// (mu - k) Phi((mu - delta) / (sigma sqrt(1 + eps^2))).
inline double expected_cb_summand(double mu, const Context& z, double delta, double eps) {
    require_positive(eps, "coupled-bootstrap eps");
    require_positive(z.sigma, "sigma");
    return (mu - z.cost) * specfun::normal_cdf((mu - delta) / (z.sigma * std::sqrt(1.0 + eps * eps)));
}

} // namespace assure
