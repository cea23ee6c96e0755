// baselines.hpp
//
// Plug-in empirical-Bayes fits (method of moments), fixed selection rules, and
// the fitted ensemble family. Each plug-in returns a parameter point of the
// matching decision family, so its decisions are members of that class.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assure/classes.hpp"
#include "assure/detail/regression.hpp"
#include "assure/error.hpp"
#include "assure/model.hpp"
#include "assure/specfun.hpp"

namespace assure {

inline constexpr double variance_floor = 1e-6;

struct PluginFit {
    ParamPoint beta;
    std::vector<std::string> flags; // e.g. "variance_floor", "variance_slope_dropped", "sigma_degenerate"
    std::size_t iterations = 0;

    bool has_flag(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }
};

// ---------------------------------------------------------------------------
// Linear shrinkage

/// mu0 = mean(y), tau^2 = max(var_{n-1}(y) - mean(sigma^2), floor); beta = (mu0, tau).
inline PluginFit linear_shrink_plugin(std::span<const double> y, std::span<const double> sigma) {
    const std::size_t n = y.size();
    if (n < 2 || sigma.size() != n)
        throw PreconditionError("linear_shrink_plugin needs at least two units with matching sigma");
    double mean = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += y[i];
        s2 += sigma[i] * sigma[i];
    }
    mean /= static_cast<double>(n);
    s2 /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : y)
        ss += (v - mean) * (v - mean);
    const double raw = ss / static_cast<double>(n - 1) - s2;
    PluginFit fit;
    double tau2 = raw;
    if (!(raw > variance_floor)) {
        tau2 = variance_floor;
        fit.flags.push_back("variance_floor");
    }
    fit.beta = {mean, std::sqrt(tau2)};
    return fit;
}

inline PluginFit linear_shrink_plugin(const Dataset& data) { return linear_shrink_plugin(data.y(), data.sigma()); }

// ---------------------------------------------------------------------------
// Fay-Herriot

namespace detail {

inline Eigen::MatrixXd design_matrix(const Dataset& data) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto p = static_cast<Eigen::Index>(data.covariate_dim());
    Eigen::MatrixXd x(n, p);
    const auto flat = data.covariate_matrix();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            x(i, j) = flat[static_cast<std::size_t>(i * p + j)];
    return x;
}

inline std::vector<std::string> covariate_names(std::size_t p) {
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= p; ++j)
        names.push_back("x" + std::to_string(j));
    return names;
}

inline Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

struct FayHerriotState {
    double a = 0.0;
    WlsFit fit;
    std::size_t iterations = 0;
    bool converged = false;
    bool floored = false;
};

// Alternates GLS for b given A with the weighted moment update
//   A = sum w_i ((n / (n - p)) r_i^2 - sigma_i^2) / sum w_i,  w_i = 1 / (sigma_i^2 + A).
inline FayHerriotState fay_herriot_iterate(const Dataset& data) {
    const std::size_t p = data.covariate_dim();
    if (p == 0)
        throw PreconditionError("fay_herriot_plugin needs at least one covariate column", "covariate_dimension");
    const std::size_t n = data.size();
    if (n <= p)
        throw PreconditionError("fay_herriot_plugin needs more units than covariates");
    const Eigen::MatrixXd x = design_matrix(data);
    const Eigen::VectorXd y = as_vector(data.y());
    const Eigen::VectorXd s2 = as_vector(data.sigma()).array().square();
    const auto names = covariate_names(p);
    const double dof = static_cast<double>(n) / static_cast<double>(n - p);

    FayHerriotState st;
    st.fit = wls(x, y, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)), names);
    {
        const Eigen::VectorXd r = y - st.fit.fitted;
        st.a = std::max(dof * r.squaredNorm() / static_cast<double>(n) - s2.mean(), variance_floor);
    }
    for (st.iterations = 1; st.iterations <= 100; ++st.iterations) {
        const Eigen::VectorXd w = (s2.array() + st.a).inverse();
        st.fit = wls(x, y, w, names);
        const Eigen::VectorXd r = y - st.fit.fitted;
        const double raw = (w.array() * (dof * r.array().square() - s2.array())).sum() / w.sum();
        const double next = std::max(raw, variance_floor);
        st.floored = !(raw > variance_floor);
        const bool done = std::abs(next - st.a) <= 1e-8 * (1.0 + st.a);
        st.a = next;
        if (done) {
            st.converged = true;
            break;
        }
    }
    st.iterations = std::min<std::size_t>(st.iterations, 100);
    const Eigen::VectorXd w = (s2.array() + st.a).inverse();
    st.fit = wls(x, y, w, names);
    return st;
}

} // namespace detail

/// beta = (A, b_1..b_p) for the fay_herriot family; the design is the
/// covariate matrix as given (include a constant column for an intercept).
inline PluginFit fay_herriot_plugin(const Dataset& data) {
    const auto st = detail::fay_herriot_iterate(data);
    PluginFit fit;
    fit.iterations = st.iterations;
    fit.beta.push_back(st.a);
    for (Eigen::Index j = 0; j < st.fit.coef.size(); ++j)
        fit.beta.push_back(st.fit.coef(j));
    if (st.floored)
        fit.flags.push_back("variance_floor");
    if (!st.converged)
        fit.flags.push_back("not_converged");
    return fit;
}

// ---------------------------------------------------------------------------
// Parametric CLOSE-GAUSS

namespace detail {

struct LogVarianceFit {
    Eigen::VectorXd coef;           // log s0^2 = z' coef
    Eigen::MatrixXd info_inverse;   // inverse of sum exp(eta) z z' (quasi-Poisson) or (Z'Z)^{-1} (fallback)
    bool quasi_poisson = true;
};

// Solves sum_i (t_i - exp(z_i' b)) z_i = 0 by Newton with step halving on
// sum_i (t_i z_i' b - exp(z_i' b)). Returns nullopt when the targets have no
// positive mass to fit (mean of t not positive) or Newton fails.
inline std::optional<LogVarianceFit> quasi_poisson_fit(const Eigen::MatrixXd& z, const Eigen::VectorXd& t) {
    const double tbar = t.mean();
    if (!(tbar > variance_floor))
        return std::nullopt;
    const auto q = z.cols();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
    b(0) = std::log(tbar); // column 0 is the intercept
    auto objective = [&](const Eigen::VectorXd& c) {
        const Eigen::VectorXd eta = z * c;
        return t.dot(eta) - eta.array().exp().sum();
    };
    double obj = objective(b);
    for (int it = 0; it < 200; ++it) {
        const Eigen::VectorXd mu = (z * b).array().exp();
        const Eigen::VectorXd score = z.transpose() * (t - mu);
        const Eigen::MatrixXd info = z.transpose() * mu.asDiagonal() * z;
        const Eigen::VectorXd step = info.ldlt().solve(score);
        if (!step.allFinite())
            return std::nullopt;
        double scale = 1.0;
        Eigen::VectorXd cand = b + step;
        double cand_obj = objective(cand);
        while (!(cand_obj >= obj) && scale > 1e-10) {
            scale *= 0.5;
            cand = b + scale * step;
            cand_obj = objective(cand);
        }
        if (!(cand_obj >= obj))
            break;
        const double change = (cand - b).cwiseAbs().maxCoeff();
        b = cand;
        obj = cand_obj;
        if (change < 1e-12)
            break;
    }
    if (!b.allFinite() || b.cwiseAbs().maxCoeff() > 700.0)
        return std::nullopt;
    const Eigen::VectorXd mu = (z * b).array().exp();
    const Eigen::MatrixXd info = z.transpose() * mu.asDiagonal() * z;
    return LogVarianceFit{b, info.ldlt().solve(Eigen::MatrixXd::Identity(q, q)), true};
}

struct CloseGaussState {
    WlsFit mean_fit;            // y on [1, sigma] (or [1])
    Eigen::MatrixXd mean_design;
    Eigen::MatrixXd var_design; // [1, log sigma] (or [1])
    Eigen::VectorXd target;     // (n / (n - q)) r^2 - sigma^2
    LogVarianceFit var_fit;
    bool degenerate = false;
    bool slope_dropped = false;
};

// For z = [1, l] the log-link objective has a finite maximizer iff
// sum t_i (max l - l_i) > 0 and sum t_i (l_i - min l) > 0.
inline bool log_variance_fit_exists(const Eigen::VectorXd& l, const Eigen::VectorXd& t) {
    const double lo = l.minCoeff(), hi = l.maxCoeff();
    return (t.array() * (hi - l.array())).sum() > 0.0 && (t.array() * (l.array() - lo)).sum() > 0.0;
}

inline CloseGaussState close_gauss_state(const Dataset& data) {
    const std::size_t n = data.size();
    if (n < 10)
        throw PreconditionError("close_gauss_plugin needs at least 10 units, got " + std::to_string(n));
    const Eigen::VectorXd y = as_vector(data.y());
    const Eigen::VectorXd sig = as_vector(data.sigma());
    const double smin = sig.minCoeff(), smax = sig.maxCoeff();
    CloseGaussState st;
    st.degenerate = !(smax - smin > 1e-10 * smax);
    const Eigen::Index q = st.degenerate ? 1 : 2;
    const auto ni = static_cast<Eigen::Index>(n);
    st.mean_design.resize(ni, q);
    st.var_design.resize(ni, q);
    st.mean_design.col(0).setOnes();
    st.var_design.col(0).setOnes();
    if (!st.degenerate) {
        st.mean_design.col(1) = sig;
        st.var_design.col(1) = sig.array().log();
    }
    st.mean_fit = wls(st.mean_design, y, Eigen::VectorXd::Ones(ni), {"intercept", "sigma"});
    const double dof = static_cast<double>(n) / static_cast<double>(n - static_cast<std::size_t>(q));
    st.target = dof * (y - st.mean_fit.fitted).array().square() - sig.array().square();
    std::optional<LogVarianceFit> qp;
    if (st.degenerate || log_variance_fit_exists(st.var_design.col(1), st.target)) {
        qp = quasi_poisson_fit(st.var_design, st.target);
    } else if (st.target.mean() > variance_floor) {
        // No finite slope: constant prior variance at the mean target.
        Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
        b(0) = std::log(st.target.mean());
        const Eigen::VectorXd mu = (st.var_design * b).array().exp();
        const Eigen::MatrixXd info = st.var_design.transpose() * mu.asDiagonal() * st.var_design;
        qp = LogVarianceFit{b, info.ldlt().solve(Eigen::MatrixXd::Identity(q, q)), true};
        st.slope_dropped = true;
    }
    if (qp) {
        st.var_fit = *qp;
    } else {
        // Least squares of log max(target, floor) on the variance design.
        const Eigen::VectorXd logt = st.target.cwiseMax(variance_floor).array().log();
        const auto ls = wls(st.var_design, logt, Eigen::VectorXd::Ones(ni));
        st.var_fit = {ls.coef, ls.normal_inverse, false};
    }
    return st;
}

} // namespace detail

/// beta = (a1, a2, b1, b2): m0(sigma) = a1 + a2 sigma by least squares of y on
/// sigma; log s0^2(sigma) = b1 + b2 log sigma fitted to the moment targets
/// (n/(n-2)) r^2 - sigma^2 by quasi-Poisson (log-link) estimating equations.
inline PluginFit close_gauss_plugin(const Dataset& data) {
    const auto st = detail::close_gauss_state(data);
    PluginFit fit;
    const double a1 = st.mean_fit.coef(0);
    const double a2 = st.degenerate ? 0.0 : st.mean_fit.coef(1);
    const double b1 = st.var_fit.coef(0);
    const double b2 = st.degenerate ? 0.0 : st.var_fit.coef(1);
    fit.beta = {a1, a2, b1, b2};
    if (st.degenerate)
        fit.flags.push_back("sigma_degenerate");
    if (!st.var_fit.quasi_poisson)
        fit.flags.push_back("variance_floor");
    if (st.slope_dropped)
        fit.flags.push_back("variance_slope_dropped");
    return fit;
}

// ---------------------------------------------------------------------------
// Fixed rules

/// 1{y_i > k_i}.
inline std::vector<int> empirical_success_rule(const Dataset& data) {
    std::vector<int> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        out[i] = data.y()[i] > data.cost()[i] ? 1 : 0;
    return out;
}

/// z_{1 - alpha}: the tstat-family parameter of the one-sided p-value rule.
inline double p_value_beta(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw PreconditionError("alpha must lie in (0, 1)", "alpha_range");
    return specfun::normal_quantile(1.0 - alpha);
}

/// 1{y_i > k_i + z_{1-alpha} sigma_i}.
inline std::vector<int> p_value_rule(const Dataset& data, double alpha) {
    const double z = p_value_beta(alpha);
    std::vector<int> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        out[i] = data.y()[i] > data.cost()[i] + z * data.sigma()[i] ? 1 : 0;
    return out;
}

// ---------------------------------------------------------------------------
// Ensemble

/// Leave-one-out components of the ensemble rule
///   alpha m(y, sigma) + (1 - alpha) f(x) >= k,
/// with m the parametric CLOSE-GAUSS posterior mean and f a GLS linear model
/// (weights 1 / (sigma^2 + A), A from fay_herriot_plugin).
///
/// m0^{(-i)} and f^{(-i)} are exact leave-one-out refits by downdating. For
/// s0^2, the variance targets keep the full-data mean fit and b^{(-i)} is one
/// Newton step from the full fit with unit i removed.
inline EnsembleComponents fit_ensemble_components(const Dataset& data) {
    const std::size_t n = data.size();
    const auto ni = static_cast<Eigen::Index>(n);
    const auto cg = detail::close_gauss_state(data);
    const Eigen::VectorXd y = detail::as_vector(data.y());

    EnsembleComponents parts;
    parts.prior_mean.resize(n);
    parts.prior_variance.resize(n);
    parts.model.resize(n);

    const Eigen::VectorXd m0 = detail::loo_predictions(cg.mean_fit, y);
    const Eigen::MatrixXd& z = cg.var_design;
    const Eigen::VectorXd& t = cg.target;
    const auto& vf = cg.var_fit;
    for (Eigen::Index i = 0; i < ni; ++i) {
        const Eigen::VectorXd zi = z.row(i).transpose();
        Eigen::VectorXd b;
        if (vf.quasi_poisson) {
            // Sherman-Morrison downdate of the information, then one Newton step.
            const double wi = std::exp(zi.dot(vf.coef));
            const Eigen::VectorXd u = vf.info_inverse * zi;
            const double denom = 1.0 - wi * zi.dot(u);
            if (!(denom > 1e-12))
                throw DomainError("ensemble leave-one-out variance refit is singular", "rank_deficient");
            const Eigen::MatrixXd inv = vf.info_inverse + (wi / denom) * u * u.transpose();
            b = vf.coef - inv * zi * (t(i) - wi);
        } else {
            // Exact downdate of the least-squares fit on log targets.
            const double lt = std::log(std::max(t(i), variance_floor));
            const Eigen::VectorXd u = vf.info_inverse * zi;
            const double lev = zi.dot(u);
            if (!(lev < 1.0 - 1e-12))
                throw DomainError("ensemble leave-one-out variance refit is singular", "rank_deficient");
            const double resid = lt - zi.dot(vf.coef);
            b = vf.coef - u * (resid / (1.0 - lev));
        }
        parts.prior_mean[static_cast<std::size_t>(i)] = m0(i);
        parts.prior_variance[static_cast<std::size_t>(i)] = std::max(std::exp(zi.dot(b)), variance_floor);
    }

    const auto fh = detail::fay_herriot_iterate(data);
    const Eigen::VectorXd f = detail::loo_predictions(fh.fit, y);
    for (std::size_t i = 0; i < n; ++i)
        parts.model[i] = f(static_cast<Eigen::Index>(i));
    return parts;
}

inline DecisionFamily fit_ensemble_family(const Dataset& data, Interval alpha_box = {0.01, 1.0, false}) {
    return DecisionFamily::ensemble(fit_ensemble_components(data), alpha_box);
}

// ---------------------------------------------------------------------------

/// The plug-in point for a family, clamped into its box; nullopt for families
/// without an empirical-Bayes plug-in (threshold, tstat and finite use none).
/// The ensemble's plug-in is alpha = 1 (the posterior-mean rule).
inline std::optional<PluginFit> plugin_for(const DecisionFamily& family, const Dataset& data) {
    std::optional<PluginFit> fit;
    switch (family.kind()) {
    case FamilyKind::linear_shrink: fit = linear_shrink_plugin(data); break;
    case FamilyKind::fay_herriot: fit = fay_herriot_plugin(data); break;
    case FamilyKind::close_gauss: fit = close_gauss_plugin(data); break;
    case FamilyKind::ensemble: fit = PluginFit{{1.0}, {}, 0}; break;
    default: return std::nullopt;
    }
    const ParamPoint clamped = family.clamp(fit->beta);
    if (clamped != fit->beta)
        fit->flags.push_back("clamped_to_box");
    fit->beta = clamped;
    return fit;
}

} // namespace assure
