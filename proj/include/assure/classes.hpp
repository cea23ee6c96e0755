// classes.hpp
//
// Parametric decision-rule families. A family maps a unit's context and a
// parameter point beta to a threshold delta; the unit is selected iff y > delta
// (Gaussian) or y >= ceil(delta) (Poisson counts).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "assure/error.hpp"
#include "assure/model.hpp"

namespace assure {

using ParamPoint = std::vector<double>;

enum class FamilyKind { threshold, tstat, finite, linear_shrink, fay_herriot, close_gauss, ensemble };

inline const char* to_string(FamilyKind k) {
    switch (k) {
    case FamilyKind::threshold: return "threshold";
    case FamilyKind::tstat: return "tstat";
    case FamilyKind::finite: return "finite";
    case FamilyKind::linear_shrink: return "linear_shrink";
    case FamilyKind::fay_herriot: return "fay_herriot";
    case FamilyKind::close_gauss: return "close_gauss";
    case FamilyKind::ensemble: return "ensemble";
    }
    return "?";
}

inline FamilyKind family_kind_from_string(const std::string& s) {
    for (auto k : {FamilyKind::threshold, FamilyKind::tstat, FamilyKind::finite, FamilyKind::linear_shrink,
                   FamilyKind::fay_herriot, FamilyKind::close_gauss, FamilyKind::ensemble})
        if (s == to_string(k))
            return k;
    throw PreconditionError("unknown family kind '" + s + "'", "unknown_family");
}

/// Closed interval for one coordinate of beta. `log_scale` coordinates are
/// strictly positive and gridded / searched geometrically.
struct Interval {
    double lo = -10.0;
    double hi = 10.0;
    bool log_scale = false;

    bool contains(double v) const { return v >= lo && v <= hi; }

    // Maps [0, 1] onto the interval (geometrically for log-scale coordinates).
    double from_unit(double t) const {
        if (log_scale)
            return std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
        return lo + t * (hi - lo);
    }

    double to_unit(double v) const {
        if (hi == lo)
            return 0.0;
        if (log_scale)
            return (std::log(v) - std::log(lo)) / (std::log(hi) - std::log(lo));
        return (v - lo) / (hi - lo);
    }
};

using Box = std::vector<Interval>;

inline constexpr Interval default_interval{-10.0, 10.0, false};
inline constexpr Interval default_variance_interval{1e-4, 1e4, true};

/// Context of unit i: (sigma, cost, covariates). `index` is the unit's position
/// in its dataset; only the leave-one-out ensemble uses it.
struct Context {
    double sigma = 1.0;
    double cost = 0.0;
    std::span<const double> covariates{};
    std::size_t index = std::numeric_limits<std::size_t>::max();
};

inline Context context_of(const Dataset& data, std::size_t i) {
    return {data.sigma()[i], data.cost()[i], data.covariates(i), i};
}

/// Per-unit leave-one-out fitted pieces of the ensemble rule.
struct EnsembleComponents {
    std::vector<double> prior_mean;     // m0^{(-i)}(sigma_i)
    std::vector<double> prior_variance; // s0^2^{(-i)}(sigma_i)
    std::vector<double> model;          // f^{(-i)}(x_i)
};

class DecisionFamily;

/// One member of a finite family: a fixed rule from another family.
struct FiniteRule {
    std::shared_ptr<const DecisionFamily> family;
    ParamPoint beta;
};

/// Threshold with its first and (optionally) second derivatives in beta.
/// `hessian` is row-major dim x dim.
struct ThresholdJet {
    double value = 0.0;
    std::vector<double> gradient;
    std::vector<double> hessian;
};

class DecisionFamily {
public:
    // delta = k + beta
    static DecisionFamily threshold(Interval range = default_interval) {
        return DecisionFamily(FamilyKind::threshold, {range});
    }

    // delta = k + beta sigma
    static DecisionFamily tstat(Interval range = default_interval) {
        return DecisionFamily(FamilyKind::tstat, {range});
    }

    // delta = k + (sigma^2 / tau^2)(k - mu0), beta = (mu0, tau)
    static DecisionFamily linear_shrink(Box box = {default_interval, default_variance_interval}) {
        return DecisionFamily(FamilyKind::linear_shrink, std::move(box));
    }

    // delta = k + (sigma^2 / A)(k - x' b), beta = (A, b_1..b_p)
    static DecisionFamily fay_herriot(std::size_t covariate_dim, Box box = {}) {
        if (covariate_dim == 0)
            throw PreconditionError("fay_herriot family needs at least one covariate");
        if (box.empty()) {
            box.push_back(default_variance_interval);
            box.insert(box.end(), covariate_dim, default_interval);
        }
        return DecisionFamily(FamilyKind::fay_herriot, std::move(box));
    }

    // delta = k + (sigma^2 / s0^2)(k - m0), m0 = a1 + a2 sigma,
    // s0^2 = exp(b1 + b2 log sigma), beta = (a1, a2, b1, b2)
    static DecisionFamily close_gauss(Box box = Box(4, default_interval)) {
        return DecisionFamily(FamilyKind::close_gauss, std::move(box));
    }

    // delta = ((k - (1 - alpha) f) / alpha)(1 + sigma^2 / s0^2) - m0 sigma^2 / s0^2, beta = (alpha)
    static DecisionFamily ensemble(EnsembleComponents parts, Interval range = {0.01, 1.0, false}) {
        const auto n = parts.model.size();
        if (parts.prior_mean.size() != n || parts.prior_variance.size() != n)
            throw PreconditionError("ensemble components have inconsistent lengths");
        for (double v : parts.prior_variance)
            if (!(v > 0.0))
                throw DomainError("ensemble prior variances must be positive", "variance_nonpositive");
        if (!(range.lo > 0.0) || range.hi > 1.0)
            throw PreconditionError("ensemble alpha box must lie in (0, 1]");
        DecisionFamily f(FamilyKind::ensemble, {range});
        f.ensemble_ = std::make_shared<const EnsembleComponents>(std::move(parts));
        return f;
    }

    // beta is the 0-based index of the member rule.
    static DecisionFamily finite(std::vector<FiniteRule> rules) {
        if (rules.empty())
            throw PreconditionError("finite family needs at least one rule");
        for (const auto& r : rules) {
            if (!r.family)
                throw PreconditionError("finite family rule has no family");
            r.family->check_beta(r.beta);
        }
        DecisionFamily f(FamilyKind::finite, {Interval{0.0, static_cast<double>(rules.size() - 1), false}});
        f.rules_ = std::make_shared<const std::vector<FiniteRule>>(std::move(rules));
        return f;
    }

    FamilyKind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return box_.size(); }
    const Box& box() const noexcept { return box_; }
    bool differentiable() const noexcept { return kind_ != FamilyKind::finite; }
    const EnsembleComponents* ensemble_components() const noexcept { return ensemble_.get(); }
    const std::vector<FiniteRule>* finite_rules() const noexcept { return rules_.get(); }

    /// Covariate dimension the family reads (fay_herriot only; 0 otherwise).
    std::size_t covariate_dim() const noexcept { return kind_ == FamilyKind::fay_herriot ? dim() - 1 : 0; }

    /// Throws PreconditionError unless beta has the right length, lies in the box
    /// and (for finite families) is an integer index.
    void check_beta(std::span<const double> beta) const {
        if (beta.size() != dim())
            throw PreconditionError(std::string(to_string(kind_)) + " expects " + std::to_string(dim()) +
                                        " parameters, got " + std::to_string(beta.size()),
                                    "beta_dimension");
        for (std::size_t j = 0; j < dim(); ++j) {
            if (!std::isfinite(beta[j]) || !box_[j].contains(beta[j]))
                throw PreconditionError("beta[" + std::to_string(j) + "] = " + detail::format_double(beta[j]) +
                                            " outside box [" + detail::format_double(box_[j].lo) + ", " +
                                            detail::format_double(box_[j].hi) + "]",
                                        "beta_outside_box");
        }
        if (kind_ == FamilyKind::finite && beta[0] != std::floor(beta[0]))
            throw PreconditionError("finite family index must be an integer", "beta_outside_box");
        check_domain(beta);
    }

    /// Validates that the unit can be evaluated (covariate length, ensemble index).
    void check_context(const Context& z) const {
        if (kind_ == FamilyKind::fay_herriot && z.covariates.size() != covariate_dim())
            throw PreconditionError("fay_herriot family expects " + std::to_string(covariate_dim()) +
                                        " covariates, unit has " + std::to_string(z.covariates.size()),
                                    "covariate_dimension");
        if (kind_ == FamilyKind::ensemble && z.index >= ensemble_->model.size())
            throw PreconditionError("ensemble threshold needs the unit index of its fitted dataset",
                                    "ensemble_index");
        if (kind_ == FamilyKind::finite)
            for (const auto& r : *rules_)
                r.family->check_context(z);
    }

    /// delta(z; beta), with full validation.
    double threshold(const Context& z, std::span<const double> beta) const {
        check_beta(beta);
        check_context(z);
        return threshold_unchecked(z, beta);
    }

    /// delta(z; beta) for a beta already validated with check_beta.
    double threshold_unchecked(const Context& z, std::span<const double> beta) const {
        const double k = z.cost;
        const double s2 = z.sigma * z.sigma;
        switch (kind_) {
        case FamilyKind::threshold:
            return k + beta[0];
        case FamilyKind::tstat:
            return k + beta[0] * z.sigma;
        case FamilyKind::linear_shrink:
            return k + s2 / (beta[1] * beta[1]) * (k - beta[0]);
        case FamilyKind::fay_herriot: {
            double xb = 0.0;
            for (std::size_t j = 0; j < z.covariates.size(); ++j)
                xb += z.covariates[j] * beta[j + 1];
            return k + s2 / beta[0] * (k - xb);
        }
        case FamilyKind::close_gauss: {
            if (beta.size() < 4)
                return std::numeric_limits<double>::quiet_NaN();
            const double m0 = beta[0] + beta[1] * z.sigma;
            const double ratio = s2 * std::exp(-beta[2] - beta[3] * std::log(z.sigma));
            return k + ratio * (k - m0);
        }
        case FamilyKind::ensemble: {
            const auto i = z.index;
            const double alpha = beta[0];
            const double ratio = s2 / ensemble_->prior_variance[i];
            const double f = ensemble_->model[i];
            return (k - (1.0 - alpha) * f) / alpha * (1.0 + ratio) - ensemble_->prior_mean[i] * ratio;
        }
        case FamilyKind::finite: {
            const auto& rule = (*rules_)[static_cast<std::size_t>(beta[0])];
            return rule.family->threshold_unchecked(z, rule.beta);
        }
        }
        return 0.0;
    }

    /// delta and its derivatives in beta; order 1 fills the gradient, order 2
    /// also the Hessian.
    ThresholdJet jet(const Context& z, std::span<const double> beta, int order) const {
        if (!differentiable())
            throw UnsupportedError("finite families have no derivatives in beta");
        if (order != 1 && order != 2)
            throw PreconditionError("derivative order must be 1 or 2");
        const std::size_t d = dim();
        ThresholdJet t;
        t.value = threshold_unchecked(z, beta);
        t.gradient.assign(d, 0.0);
        if (order == 2)
            t.hessian.assign(d * d, 0.0);
        auto H = [&](std::size_t a, std::size_t b, double v) {
            if (order == 2) {
                t.hessian[a * d + b] = v;
                t.hessian[b * d + a] = v;
            }
        };
        const double k = z.cost;
        const double s2 = z.sigma * z.sigma;
        switch (kind_) {
        case FamilyKind::threshold:
            t.gradient[0] = 1.0;
            break;
        case FamilyKind::tstat:
            t.gradient[0] = z.sigma;
            break;
        case FamilyKind::linear_shrink: {
            const double mu0 = beta[0], tau = beta[1];
            const double tau2 = tau * tau;
            t.gradient[0] = -s2 / tau2;
            t.gradient[1] = -2.0 * s2 * (k - mu0) / (tau2 * tau);
            H(0, 1, 2.0 * s2 / (tau2 * tau));
            H(1, 1, 6.0 * s2 * (k - mu0) / (tau2 * tau2));
            break;
        }
        case FamilyKind::fay_herriot: {
            const double a = beta[0];
            double xb = 0.0;
            for (std::size_t j = 0; j < z.covariates.size(); ++j)
                xb += z.covariates[j] * beta[j + 1];
            t.gradient[0] = -s2 * (k - xb) / (a * a);
            H(0, 0, 2.0 * s2 * (k - xb) / (a * a * a));
            for (std::size_t j = 0; j < z.covariates.size(); ++j) {
                t.gradient[j + 1] = -s2 * z.covariates[j] / a;
                H(0, j + 1, s2 * z.covariates[j] / (a * a));
            }
            break;
        }
        case FamilyKind::close_gauss: {
            const double log_s = std::log(z.sigma);
            const double m0 = beta[0] + beta[1] * z.sigma;
            const double r = s2 * std::exp(-beta[2] - beta[3] * log_s);
            const double gap = k - m0;
            t.gradient = {-r, -r * z.sigma, -r * gap, -r * gap * log_s};
            H(0, 2, r);
            H(0, 3, r * log_s);
            H(1, 2, r * z.sigma);
            H(1, 3, r * z.sigma * log_s);
            H(2, 2, r * gap);
            H(2, 3, r * gap * log_s);
            H(3, 3, r * gap * log_s * log_s);
            break;
        }
        case FamilyKind::ensemble: {
            const auto i = z.index;
            const double alpha = beta[0];
            const double c = 1.0 + s2 / ensemble_->prior_variance[i];
            const double gap = k - ensemble_->model[i];
            t.gradient[0] = -gap / (alpha * alpha) * c;
            H(0, 0, 2.0 * gap / (alpha * alpha * alpha) * c);
            break;
        }
        case FamilyKind::finite:
            break;
        }
        return t;
    }

    /// Midpoint of the box (geometric midpoint on log-scale coordinates).
    ParamPoint box_center() const {
        ParamPoint c(dim());
        for (std::size_t j = 0; j < dim(); ++j)
            c[j] = box_[j].from_unit(0.5);
        if (kind_ == FamilyKind::finite)
            c[0] = std::floor(c[0]);
        return c;
    }

    /// Projects a point into the box.
    ParamPoint clamp(ParamPoint beta) const {
        for (std::size_t j = 0; j < dim() && j < beta.size(); ++j)
            beta[j] = std::clamp(beta[j], box_[j].lo, box_[j].hi);
        return beta;
    }

private:
    DecisionFamily(FamilyKind kind, Box box) : kind_(kind), box_(std::move(box)) {
        for (const auto& iv : box_) {
            if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
                throw PreconditionError("box lower bound must not exceed upper bound", "invalid_box");
            if (iv.log_scale && !(iv.lo > 0.0))
                throw PreconditionError("log-scale box coordinates must be positive", "invalid_box");
        }
        const std::size_t expected = [&]() -> std::size_t {
            switch (kind) {
            case FamilyKind::threshold:
            case FamilyKind::tstat:
            case FamilyKind::ensemble:
            case FamilyKind::finite: return 1;
            case FamilyKind::linear_shrink: return 2;
            case FamilyKind::close_gauss: return 4;
            case FamilyKind::fay_herriot: return box_.size() >= 2 ? box_.size() : 2;
            }
            return 0;
        }();
        if (box_.size() != expected)
            throw PreconditionError(std::string(to_string(kind)) + " family needs a " + std::to_string(expected) +
                                        "-dimensional box",
                                    "invalid_box");
    }

    void check_domain(std::span<const double> beta) const {
        switch (kind_) {
        case FamilyKind::linear_shrink:
            if (!(beta[1] > 0.0))
                throw DomainError("linear_shrink requires tau > 0", "variance_nonpositive");
            break;
        case FamilyKind::fay_herriot:
            if (!(beta[0] > 0.0))
                throw DomainError("fay_herriot requires A > 0", "variance_nonpositive");
            break;
        case FamilyKind::ensemble:
            if (!(beta[0] > 0.0 && beta[0] <= 1.0))
                throw DomainError("ensemble requires alpha in (0, 1]", "alpha_range");
            break;
        default:
            break;
        }
    }

    FamilyKind kind_;
    Box box_;
    std::shared_ptr<const EnsembleComponents> ensemble_;
    std::shared_ptr<const std::vector<FiniteRule>> rules_;
};

/// 1{y > delta}: nondecreasing in y.
inline int decide(const DecisionFamily& family, const Context& z, std::span<const double> beta, double y) {
    return y > family.threshold(z, beta) ? 1 : 0;
}

/// ceil(delta) clamped at 0; the Poisson decision is 1{y >= result}.
inline std::int64_t integer_cutoff(double delta) {
    if (!(delta > 0.0))
        return 0; // also maps -inf
    constexpr double cap = 9007199254740992.0; // 2^53
    return static_cast<std::int64_t>(std::ceil(std::min(delta, cap)));
}

inline std::int64_t integer_threshold(const DecisionFamily& family, const Context& z, std::span<const double> beta) {
    return integer_cutoff(family.threshold(z, beta));
}

/// Thresholds delta_i for every unit of `data`; validates beta once.
inline std::vector<double> thresholds(const Dataset& data, const DecisionFamily& family, std::span<const double> beta) {
    family.check_beta(beta);
    if (family.kind() == FamilyKind::ensemble && family.ensemble_components()->model.size() != data.size())
        throw PreconditionError("ensemble family was fitted on a dataset of a different size", "ensemble_index");
    const std::size_t n = data.size();
    family.check_context(context_of(data, 0));
    std::vector<double> delta(n);
    const auto cost = data.cost();
    const auto sigma = data.sigma();
    switch (family.kind()) {
    case FamilyKind::threshold:
        for (std::size_t i = 0; i < n; ++i)
            delta[i] = cost[i] + beta[0];
        break;
    case FamilyKind::tstat:
        for (std::size_t i = 0; i < n; ++i)
            delta[i] = cost[i] + beta[0] * sigma[i];
        break;
    default:
        for (std::size_t i = 0; i < n; ++i)
            delta[i] = family.threshold_unchecked(context_of(data, i), beta);
        break;
    }
    for (double d : delta)
        if (std::isnan(d))
            throw DomainError("threshold evaluated to NaN");
    return delta;
}

/// Selection decisions 1{y_i > delta_i} (Gaussian) or 1{y_i >= ceil(delta_i)} (Poisson).
inline std::vector<int> decisions(const Dataset& data, const DecisionFamily& family, std::span<const double> beta) {
    const auto delta = thresholds(data, family, beta);
    std::vector<int> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double y = data.y()[i];
        out[i] = data.mode() == Likelihood::gaussian ? (y > delta[i] ? 1 : 0)
                                                     : (y >= static_cast<double>(integer_cutoff(delta[i])) ? 1 : 0);
    }
    return out;
}

} // namespace assure
