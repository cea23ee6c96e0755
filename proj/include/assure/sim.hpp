// sim.hpp
//
// Monte Carlo harness: scenario generation, per-method replications scored
// against ground truth, regret-rate and uniform-gap experiments, and the
// quadrature bias-envelope check.
//
// The true means (and sigma, cost, covariates) are drawn once per scenario;
// each replication redraws only the observations. Every random draw comes
// from a stream keyed by (seed, tag, rep, unit), and replications are
// assembled by index, so reports do not depend on the thread count.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "assure/baselines.hpp"
#include "assure/classes.hpp"
#include "assure/estimators.hpp"
#include "assure/model.hpp"
#include "assure/optimize.hpp"
#include "assure/parallel.hpp"
#include "assure/rng.hpp"

namespace assure {

// ---------------------------------------------------------------------------
// Scenario

struct GeneratorSpec {
    enum class Kind { two_point, gaussian_prior, bimodal, lognormal_prior, from_file };
    Kind kind = Kind::gaussian_prior;
    double h = 1.0;      // two_point: mu_i = sign * h / sqrt(n)
    double sign = 1.0;
    double mean = 0.0;   // gaussian_prior / lognormal_prior (log scale)
    double sd = 1.0;
    double a = 1.0;      // bimodal: center +/- a
    double weight = 0.5; // bimodal: P(center + a)
    double center = 0.0;
    std::vector<double> values; // from_file
};

struct SigmaSpec {
    enum class Kind { constant, lognormal, from_file };
    Kind kind = Kind::constant;
    double value = 1.0;
    double meanlog = 0.0;
    double sdlog = 0.5;
    std::vector<double> values;
};

struct CostSpec {
    enum class Kind { constant, from_file };
    Kind kind = Kind::constant;
    double value = 0.0;
    std::vector<double> values;
};

struct CovariateSpec {
    enum class Kind { none, mu_plus_t_noise, pure_noise };
    Kind kind = Kind::none;
    double scale = 1.0;
    int df = 10;
};

struct MisspecSpec {
    enum class Kind { none, student_t };
    Kind kind = Kind::none;
    int df = 10;
};

struct MethodSpec {
    enum class Kind { assure, cb, plugin, success_rule, pvalue, poisson_assure };
    Kind kind = Kind::assure;
    FamilyKind family = FamilyKind::threshold;
    double alpha = 0.05;
    std::string id;
};

struct OptimizerSpec {
    std::size_t grid_size = 201;
    std::size_t starts = 8;
    bool polish = true;
};

struct ScenarioSpec {
    GeneratorSpec generator;
    SigmaSpec sigma;
    CostSpec cost;
    CovariateSpec covariates;
    MisspecSpec misspec;
    std::size_t n = 1000;
    std::size_t reps = 40;
    std::uint64_t seed = 1;
    Likelihood mode = Likelihood::gaussian;
    bool redraw_mu = false;
    std::vector<std::string> methods;
    std::map<FamilyKind, Box> boxes; // optional box overrides
    OptimizerSpec optimizer;
    std::optional<double> h;   // ASSURE bandwidth override
    std::optional<double> eps; // coupled-bootstrap override

    void validate() const {
        if (n < Dataset::min_units)
            throw PreconditionError("scenario n must be at least 3", "too_few_rows");
        if (reps < 1)
            throw PreconditionError("scenario reps must be at least 1", "reps");
        auto finite = [](double v) { return std::isfinite(v); };
        const auto& g = generator;
        if (!finite(g.h) || !finite(g.sign) || !finite(g.mean) || !finite(g.sd) || !finite(g.a) ||
            !finite(g.center) || !(g.weight >= 0.0 && g.weight <= 1.0) || g.sd < 0.0)
            throw PreconditionError("generator parameters must be finite (weight in [0, 1], sd >= 0)", "generator");
        if (sigma.kind == SigmaSpec::Kind::constant && !(sigma.value > 0.0 && finite(sigma.value)))
            throw PreconditionError("constant sigma must be positive", "invalid_sigma");
        if (!finite(sigma.meanlog) || !(sigma.sdlog >= 0.0) || !finite(cost.value) || !finite(covariates.scale))
            throw PreconditionError("scenario parameters must be finite", "generator");
        if (covariates.kind != CovariateSpec::Kind::none && covariates.df < 1)
            throw PreconditionError("covariate t degrees of freedom must be >= 1", "generator");
        if (misspec.kind == MisspecSpec::Kind::student_t && misspec.df < 1)
            throw PreconditionError("misspecification degrees of freedom must be >= 1", "generator");
        if (mode == Likelihood::poisson && misspec.kind != MisspecSpec::Kind::none)
            throw PreconditionError("likelihood misspecification applies to gaussian scenarios only", "mode_mismatch");
        if (methods.empty())
            throw PreconditionError("scenario lists no methods", "unknown_method");
    }
};

inline MethodSpec parse_method(const std::string& id) {
    MethodSpec m;
    m.id = id;
    const auto colon = id.find(':');
    const std::string head = id.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : id.substr(colon + 1);
    if (head == "success_rule" && arg.empty()) {
        m.kind = MethodSpec::Kind::success_rule;
        m.family = FamilyKind::threshold;
        return m;
    }
    if (head == "pvalue") {
        m.kind = MethodSpec::Kind::pvalue;
        m.family = FamilyKind::tstat;
        const auto v = detail::parse_double(arg);
        if (!v || !(*v > 0.0 && *v < 1.0))
            throw PreconditionError("pvalue method needs alpha in (0, 1): '" + id + "'", "unknown_method");
        m.alpha = *v;
        return m;
    }
    if (head == "assure")
        m.kind = MethodSpec::Kind::assure;
    else if (head == "cb")
        m.kind = MethodSpec::Kind::cb;
    else if (head == "plugin")
        m.kind = MethodSpec::Kind::plugin;
    else if (head == "poisson_assure")
        m.kind = MethodSpec::Kind::poisson_assure;
    else
        throw PreconditionError("unknown method id '" + id + "'", "unknown_method");
    if (arg.empty())
        throw PreconditionError("method '" + id + "' needs a family, e.g. " + head + ":threshold", "unknown_method");
    m.family = family_kind_from_string(arg);
    if (m.family == FamilyKind::finite)
        throw UnsupportedError("finite families are not available in simulations");
    return m;
}

/// A scenario realized once: units (sigma, cost, covariates) and true means.
struct ScenarioInstance {
    std::vector<double> sigma, cost, covariates;
    std::size_t covariate_dim = 0;
    GroundTruth truth;
};

namespace detail {

inline std::vector<double> sized_values(const std::vector<double>& v, std::size_t n, const char* what) {
    if (v.size() != n)
        throw PreconditionError(std::string(what) + " file has " + std::to_string(v.size()) +
                                    " values, scenario n is " + std::to_string(n),
                                "length_mismatch");
    return v;
}

inline std::vector<double> draw_mu(const ScenarioSpec& s, std::uint32_t rep) {
    const std::size_t n = s.n;
    const auto& g = s.generator;
    std::vector<double> mu(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream rs(s.seed, StreamTag::mu, rep, static_cast<std::uint32_t>(i));
        switch (g.kind) {
        case GeneratorSpec::Kind::two_point: mu[i] = g.sign * g.h / std::sqrt(static_cast<double>(n)); break;
        case GeneratorSpec::Kind::gaussian_prior: mu[i] = g.mean + g.sd * rs.normal(); break;
        case GeneratorSpec::Kind::lognormal_prior: mu[i] = std::exp(g.mean + g.sd * rs.normal()); break;
        case GeneratorSpec::Kind::bimodal: mu[i] = g.center + (rs.uniform() < g.weight ? g.a : -g.a); break;
        case GeneratorSpec::Kind::from_file: break;
        }
    }
    if (g.kind == GeneratorSpec::Kind::from_file)
        mu = sized_values(g.values, n, "mu");
    if (s.mode == Likelihood::poisson)
        for (double m : mu)
            if (!(m >= 0.0))
                throw DomainError("poisson scenarios need non-negative means; use lognormal_prior or a "
                                  "non-negative generator",
                                  "invalid_mean");
    return mu;
}

} // namespace detail

inline ScenarioInstance make_instance(const ScenarioSpec& s, std::uint32_t mu_rep = 0) {
    s.validate();
    const std::size_t n = s.n;
    ScenarioInstance inst;
    inst.truth.mu = detail::draw_mu(s, mu_rep);
    inst.sigma.resize(n);
    inst.cost.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream rs(s.seed, StreamTag::sigma, 0, static_cast<std::uint32_t>(i));
        inst.sigma[i] = s.sigma.kind == SigmaSpec::Kind::lognormal ? std::exp(s.sigma.meanlog + s.sigma.sdlog * rs.normal())
                                                                     : s.sigma.value;
    }
    if (s.sigma.kind == SigmaSpec::Kind::from_file)
        inst.sigma = detail::sized_values(s.sigma.values, n, "sigma");
    if (s.mode == Likelihood::poisson)
        std::fill(inst.sigma.begin(), inst.sigma.end(), 1.0);
    if (s.cost.kind == CostSpec::Kind::from_file)
        inst.cost = detail::sized_values(s.cost.values, n, "cost");
    else
        std::fill(inst.cost.begin(), inst.cost.end(), s.cost.value);
    if (s.covariates.kind != CovariateSpec::Kind::none) {
        inst.covariate_dim = 2; // intercept column, then X
        inst.covariates.resize(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            RandomStream rs(s.seed, StreamTag::covariate, mu_rep, static_cast<std::uint32_t>(i));
            const double t = rs.student_t(s.covariates.df);
            const double x = s.covariates.kind == CovariateSpec::Kind::mu_plus_t_noise
                                 ? inst.truth.mu[i] + s.covariates.scale * inst.sigma[i] * t
                                 : s.covariates.scale * t;
            inst.covariates[2 * i] = 1.0;
            inst.covariates[2 * i + 1] = x;
        }
    }
    return inst;
}

/// Observations for replication `rep`.
inline Dataset draw_dataset(const ScenarioSpec& s, const ScenarioInstance& inst, std::uint32_t rep) {
    const std::size_t n = s.n;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream rs(s.seed, StreamTag::outcome, rep, static_cast<std::uint32_t>(i));
        const double mu = inst.truth.mu[i];
        if (s.mode == Likelihood::poisson)
            y[i] = static_cast<double>(rs.poisson(mu));
        else if (s.misspec.kind == MisspecSpec::Kind::student_t)
            y[i] = mu + inst.sigma[i] * rs.student_t(s.misspec.df);
        else
            y[i] = mu + inst.sigma[i] * rs.normal();
    }
    return Dataset(std::move(y), inst.sigma, inst.cost, inst.covariates, inst.covariate_dim, s.mode);
}

inline DecisionFamily scenario_family(const ScenarioSpec& s, FamilyKind kind, std::size_t covariate_dim) {
    const auto it = s.boxes.find(kind);
    const bool custom = it != s.boxes.end();
    switch (kind) {
    case FamilyKind::threshold: return custom ? DecisionFamily::threshold(it->second.at(0)) : DecisionFamily::threshold();
    case FamilyKind::tstat: return custom ? DecisionFamily::tstat(it->second.at(0)) : DecisionFamily::tstat();
    case FamilyKind::linear_shrink:
        return custom ? DecisionFamily::linear_shrink(it->second) : DecisionFamily::linear_shrink();
    case FamilyKind::close_gauss: return custom ? DecisionFamily::close_gauss(it->second) : DecisionFamily::close_gauss();
    case FamilyKind::fay_herriot:
        if (covariate_dim == 0)
            throw PreconditionError("fay_herriot methods need a covariate model", "covariate_dimension");
        return DecisionFamily::fay_herriot(covariate_dim, custom ? it->second : Box{});
    default: break;
    }
    throw UnsupportedError(std::string("no fixed family for kind ") + to_string(kind));
}

// ---------------------------------------------------------------------------
// In-class oracle

struct OracleResult {
    ParamPoint beta;
    double welfare = 0.0;
};

/// argmax of the true welfare W over the family's box: a 10^4-point grid with
/// golden-section refinement in dim 1, multistart Nelder-Mead (64 starts) otherwise.
inline OracleResult in_class_oracle(const Dataset& data, const GroundTruth& truth, const DecisionFamily& family,
                                    std::uint64_t seed, const std::vector<ParamPoint>& extra_starts = {}) {
    const Objective w = [&](std::span<const double> beta) { return oracle_welfare(data, truth, family, beta); };
    OptimizationResult r;
    if (family.dim() == 1) {
        constexpr std::size_t grid = 10000;
        r = grid_search({interval_grid(family.box()[0], grid)}, w);
        if (data.mode() == Likelihood::gaussian)
            r = polish_1d(family.box()[0], w, std::move(r), grid, 1e-12);
    } else {
        std::vector<ParamPoint> starts;
        for (const auto& s : extra_starts)
            starts.push_back(family.clamp(s));
        starts.push_back(family.box_center());
        for (const auto& x : halton_points(64 - std::min<std::size_t>(starts.size(), 63), family.dim(), seed ^ 0x5EEDu))
            starts.push_back(from_unit(family.box(), x));
        NelderMeadOptions nm;
        nm.max_evaluations = 600 * (family.dim() + 1);
        r = multistart_search(family.box(), w, starts, nm);
    }
    return {r.beta_hat, r.value};
}

// ---------------------------------------------------------------------------
// Reports

struct RepRow {
    std::size_t rep = 0;
    ParamPoint beta_hat;            // empty for rules without a parameter
    double welfare = 0.0;           // W(beta_hat): oracle welfare of the chosen decisions
    double utility = 0.0;           // u(beta_hat) on the realized observations
    double regret = 0.0;            // W(beta*) - W(beta_hat)
    double oracle_welfare = 0.0;    // W(beta*) for this replication's class
    double estimate = std::numeric_limits<double>::quiet_NaN();           // in-sample estimate at beta_hat
    double estimate_at_plugin = std::numeric_limits<double>::quiet_NaN(); // in-sample estimate at the plug-in
    bool warning = false;
};

struct SummaryStats {
    double mean = 0.0;
    double std_error = 0.0;
    double q05 = 0.0, q50 = 0.0, q95 = 0.0;
};

inline double quantile_sorted(const std::vector<double>& v, double p) {
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline SummaryStats summarize_values(std::vector<double> v) {
    SummaryStats s;
    const Moments m = pairwise_moments(v);
    s.mean = m.mean;
    s.std_error = m.count > 1 ? std::sqrt(m.m2 / static_cast<double>(m.count - 1) / static_cast<double>(m.count)) : 0.0;
    std::sort(v.begin(), v.end());
    s.q05 = quantile_sorted(v, 0.05);
    s.q50 = quantile_sorted(v, 0.50);
    s.q95 = quantile_sorted(v, 0.95);
    return s;
}

struct MethodReport {
    MethodSpec method;
    std::optional<OracleResult> oracle; // shared across reps; absent when refitted per rep
    std::vector<RepRow> reps;
    SummaryStats welfare, utility, regret;
};

struct SimReport {
    ScenarioSpec spec;
    double bandwidth = 0.0;
    std::vector<MethodReport> methods;
    std::vector<std::string> unavailable{"npmle", "close_npmle"};
};

namespace detail {

struct MethodPlan {
    MethodSpec spec;
    std::optional<DecisionFamily> family; // fixed family (absent for the ensemble)
    std::optional<OracleResult> oracle;
};

inline EstimatorOptions method_estimator(const ScenarioSpec& s, MethodSpec::Kind k) {
    EstimatorOptions e;
    e.h = s.h;
    e.eps = s.eps;
    e.method = k == MethodSpec::Kind::cb ? Method::cb
               : k == MethodSpec::Kind::poisson_assure ? Method::poisson
                                                       : Method::assure;
    return e;
}

inline void check_mode(const ScenarioSpec& s, const MethodSpec& m) {
    const bool poisson_method = m.kind == MethodSpec::Kind::poisson_assure;
    if (s.mode == Likelihood::poisson && (m.kind == MethodSpec::Kind::assure || m.kind == MethodSpec::Kind::cb ||
                                          m.kind == MethodSpec::Kind::plugin))
        throw PreconditionError("method '" + m.id + "' needs a gaussian scenario", "mode_mismatch");
    if (s.mode == Likelihood::gaussian && poisson_method)
        throw PreconditionError("method '" + m.id + "' needs a poisson scenario", "mode_mismatch");
}

inline RepRow run_method(const ScenarioSpec& s, const ScenarioInstance& inst, const Dataset& data,
                         const MethodPlan& plan, std::size_t rep) {
    const auto& m = plan.spec;
    RepRow row;
    row.rep = rep;
    const DecisionFamily family = plan.family ? *plan.family : fit_ensemble_family(data, s.boxes.count(FamilyKind::ensemble)
                                                                                             ? s.boxes.at(FamilyKind::ensemble).at(0)
                                                                                             : Interval{0.01, 1.0, false});
    const auto est = method_estimator(s, m.kind);
    switch (m.kind) {
    case MethodSpec::Kind::success_rule: row.beta_hat = {0.0}; break;
    case MethodSpec::Kind::pvalue: row.beta_hat = {p_value_beta(m.alpha)}; break;
    case MethodSpec::Kind::plugin: {
        const auto plug = plugin_for(family, data);
        if (!plug)
            throw PreconditionError("family " + std::string(to_string(m.family)) + " has no plug-in", "unknown_method");
        row.beta_hat = plug->beta;
        break;
    }
    default: {
        OptimizationResult r;
        if (family.dim() == 1) {
            r = (s.mode == Likelihood::gaussian && s.optimizer.polish)
                    ? grid_polish_argmax(data, family, est, s.optimizer.grid_size)
                    : grid_argmax(data, family, est, s.optimizer.grid_size);
        } else {
            r = multistart_argmax(data, family, est, s.optimizer.starts, s.seed + rep);
        }
        row.beta_hat = r.beta_hat;
        row.estimate = r.value;
        row.warning = r.warning;
        if (auto plug = plugin_for(family, data))
            row.estimate_at_plugin = estimate(data, family, plug->beta, est).value;
        break;
    }
    }
    row.welfare = oracle_welfare(data, inst.truth, family, row.beta_hat);
    row.utility = realized_utility(data, inst.truth, family, row.beta_hat);
    const OracleResult oracle = plan.oracle ? *plan.oracle : in_class_oracle(data, inst.truth, family, s.seed + rep);
    row.oracle_welfare = oracle.welfare;
    row.regret = oracle.welfare - row.welfare;
    return row;
}

} // namespace detail

inline SimReport run_scenario(const ScenarioSpec& s) {
    s.validate();
    std::vector<detail::MethodPlan> plans;
    for (const auto& id : s.methods) {
        detail::MethodPlan p;
        p.spec = parse_method(id);
        detail::check_mode(s, p.spec);
        plans.push_back(std::move(p));
    }
    const ScenarioInstance base = make_instance(s);
    if (!s.redraw_mu) {
        // Oracles depend only on the fixed instance; the observation draw of
        // rep 0 only seeds extra multistart points for dim > 1.
        const Dataset probe = draw_dataset(s, base, 0);
        for (auto& p : plans) {
            if (p.spec.family == FamilyKind::ensemble)
                continue;
            p.family = scenario_family(s, p.spec.family, base.covariate_dim);
            std::vector<ParamPoint> extra;
            if (auto plug = plugin_for(*p.family, probe))
                extra.push_back(plug->beta);
            p.oracle = in_class_oracle(probe, base.truth, *p.family, s.seed, extra);
        }
    } else {
        for (auto& p : plans)
            if (p.spec.family != FamilyKind::ensemble)
                p.family = scenario_family(s, p.spec.family, base.covariate_dim);
    }

    std::vector<std::vector<RepRow>> rows(s.reps, std::vector<RepRow>(plans.size()));
    parallel_for(s.reps, [&](std::size_t rep) {
        const auto r32 = static_cast<std::uint32_t>(rep);
        const ScenarioInstance inst = s.redraw_mu ? make_instance(s, r32 + 1) : ScenarioInstance{};
        const ScenarioInstance& use = s.redraw_mu ? inst : base;
        const Dataset data = draw_dataset(s, use, r32);
        for (std::size_t k = 0; k < plans.size(); ++k)
            rows[rep][k] = detail::run_method(s, use, data, plans[k], rep);
    });

    SimReport report;
    report.spec = s;
    report.bandwidth = s.h ? *s.h : auto_bandwidth(s.n).h;
    for (std::size_t k = 0; k < plans.size(); ++k) {
        MethodReport mr;
        mr.method = plans[k].spec;
        mr.oracle = plans[k].oracle;
        std::vector<double> w, u, g;
        for (std::size_t rep = 0; rep < s.reps; ++rep) {
            mr.reps.push_back(rows[rep][k]);
            w.push_back(rows[rep][k].welfare);
            u.push_back(rows[rep][k].utility);
            g.push_back(rows[rep][k].regret);
        }
        mr.welfare = summarize_values(std::move(w));
        mr.utility = summarize_values(std::move(u));
        mr.regret = summarize_values(std::move(g));
        report.methods.push_back(std::move(mr));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Rate experiments

struct RateRow {
    std::size_t n = 0;
    double mean = 0.0;
    double std_error = 0.0;
};

struct RateTable {
    std::vector<RateRow> rows;
    double slope = std::numeric_limits<double>::quiet_NaN();
    double slope_std_error = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

inline void check_n_list(const std::vector<std::size_t>& n_list, std::size_t reps) {
    if (n_list.size() < 4)
        throw PreconditionError("rate experiments need at least 4 sample sizes", "n_list");
    if (reps < 1)
        throw PreconditionError("rate experiments need reps >= 1", "reps");
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        if (n_list[k] < Dataset::min_units)
            throw PreconditionError("every n must be at least 3", "too_few_rows");
        if (k > 0 && n_list[k] <= n_list[k - 1])
            throw PreconditionError("n_list must be strictly increasing", "n_list");
    }
}

} // namespace detail

/// Least-squares slope of log(mean) on log(n) with a leave-one-n-out
/// jackknife standard error. NaN if any mean is not positive.
inline void fit_rate(RateTable& t) {
    std::vector<double> x, y;
    for (const auto& r : t.rows) {
        if (!(r.mean > 0.0))
            return;
        x.push_back(std::log(static_cast<double>(r.n)));
        y.push_back(std::log(r.mean));
    }
    t.slope = detail::ols_slope(x, y);
    const std::size_t k = x.size();
    std::vector<double> loo(k);
    for (std::size_t drop = 0; drop < k; ++drop) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < k; ++i)
            if (i != drop) {
                xs.push_back(x[i]);
                ys.push_back(y[i]);
            }
        loo[drop] = detail::ols_slope(xs, ys);
    }
    double mean = 0.0;
    for (double v : loo)
        mean += v;
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (double v : loo)
        ss += (v - mean) * (v - mean);
    t.slope_std_error = std::sqrt(static_cast<double>(k - 1) / static_cast<double>(k) * ss);
}

/// Mean regret of one method across sample sizes.
inline RateTable rate_experiment(ScenarioSpec tmpl, const std::vector<std::size_t>& n_list, std::size_t reps,
                                 const std::string& method) {
    detail::check_n_list(n_list, reps);
    tmpl.reps = reps;
    tmpl.methods = {method};
    RateTable t;
    for (std::size_t n : n_list) {
        tmpl.n = n;
        const auto rep = run_scenario(tmpl);
        t.rows.push_back({n, rep.methods[0].regret.mean, rep.methods[0].regret.std_error});
    }
    fit_rate(t);
    return t;
}

/// Mean over reps of max_beta |W_hat(beta) - u(beta)| on a grid_size-point
/// grid of a dim-1 family.
inline RateTable uniform_gap_experiment(ScenarioSpec tmpl, const std::vector<std::size_t>& n_list, std::size_t reps,
                                        FamilyKind kind = FamilyKind::threshold, std::size_t grid_size = 501) {
    detail::check_n_list(n_list, reps);
    tmpl.reps = reps;
    if (tmpl.methods.empty())
        tmpl.methods = {"assure:threshold"};
    RateTable t;
    for (std::size_t n : n_list) {
        tmpl.n = n;
        tmpl.validate();
        const ScenarioInstance inst = make_instance(tmpl);
        const DecisionFamily family = scenario_family(tmpl, kind, inst.covariate_dim);
        if (family.dim() != 1)
            throw PreconditionError("uniform_gap_experiment needs a one-dimensional family", "beta_dimension");
        const auto grid = grid_size == 1 ? std::vector<double>{family.box_center()[0]}
                                         : interval_grid(family.box()[0], grid_size);
        EstimatorOptions est;
        est.h = tmpl.h;
        est.method = tmpl.mode == Likelihood::poisson ? Method::poisson : Method::assure;
        std::vector<double> gaps(reps);
        parallel_for(reps, [&](std::size_t rep) {
            const Dataset data = draw_dataset(tmpl, inst, static_cast<std::uint32_t>(rep));
            double worst = 0.0;
            for (double b : grid) {
                const ParamPoint beta{b};
                const double gap = estimate(data, family, beta, est).value - realized_utility(data, inst.truth, family, beta);
                worst = std::max(worst, std::abs(gap));
            }
            gaps[rep] = worst;
        });
        const auto s = summarize_values(gaps);
        t.rows.push_back({n, s.mean, s.std_error});
    }
    fit_rate(t);
    return t;
}

// ---------------------------------------------------------------------------
// Bias envelope

struct BiasCell {
    double h = 0.0, mu = 0.0, delta = 0.0, sigma = 1.0, cost = 0.0;
    double bias = 0.0;
    double bound = 0.0;
    bool pass = true;
};

struct BiasEnvelopeReport {
    std::vector<BiasCell> cells;
    bool pass = true;

    std::vector<BiasCell> failures() const {
        std::vector<BiasCell> out;
        for (const auto& c : cells)
            if (!c.pass)
                out.push_back(c);
        return out;
    }
};

/// |E w_h - (mu - k) Phi((mu - delta) / sigma)| <= |mu - k| h^2 exp(-1/(2h^2)) + 1e-9
/// in every cell, with the expectation by Gauss-Hermite quadrature.
inline BiasEnvelopeReport bias_envelope_check(const std::vector<double>& h_list, const std::vector<double>& mu_grid,
                                              const std::vector<double>& delta_grid,
                                              const std::vector<double>& sigma_grid = {1.0}, double cost = 0.0) {
    BiasEnvelopeReport rep;
    for (double h : h_list)
        for (double sigma : sigma_grid)
            for (double mu : mu_grid)
                for (double delta : delta_grid) {
                    for (double v : {h, sigma, mu, delta, cost})
                        if (!std::isfinite(v))
                            throw PreconditionError("bias grid values must be finite");
                    if (!(sigma > 0.0))
                        throw PreconditionError("bias grid sigma must be positive", "invalid_sigma");
                    const Context z{sigma, cost, {}, 0};
                    BiasCell c{h, mu, delta, sigma, cost};
                    c.bias = expected_assure_summand(mu, z, delta, h) -
                             (mu - cost) * specfun::normal_cdf((mu - delta) / sigma);
                    c.bound = assure_bias_bound(mu, cost, h);
                    c.pass = std::abs(c.bias) <= c.bound + 1e-9;
                    rep.pass = rep.pass && c.pass;
                    rep.cells.push_back(c);
                }
    return rep;
}

} // namespace assure
