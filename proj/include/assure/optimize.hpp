// optimize.hpp
//
// Maximizing an estimated welfare surface over a family's box: tensor grids,
// golden-section polish, multistart Nelder-Mead, welfare curves and cost sweeps.
//
// Search happens in unit-cube coordinates (geometric for log-scale
// coordinates). Returned values are always re-evaluated at the returned point.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "assure/baselines.hpp"
#include "assure/classes.hpp"
#include "assure/estimators.hpp"
#include "assure/parallel.hpp"
#include "assure/rng.hpp"

namespace assure {

using Objective = std::function<double(std::span<const double>)>;

struct TracePoint {
    ParamPoint beta;
    double value = 0.0;
};

struct OptimizationResult {
    ParamPoint beta_hat;
    double value = 0.0;
    double std_error = 0.0;
    std::size_t evaluations = 0;
    bool warning = false; // multistart: no start improved on its initial value
    std::vector<TracePoint> trace;
};

// ---------------------------------------------------------------------------
// Grids

/// grid_size points over an interval, endpoints exact; geometric on log scale.
inline std::vector<double> interval_grid(const Interval& iv, std::size_t grid_size) {
    if (grid_size < 2)
        throw PreconditionError("grid_size must be at least 2");
    std::vector<double> g(grid_size);
    for (std::size_t j = 0; j < grid_size; ++j)
        g[j] = iv.from_unit(static_cast<double>(j) / static_cast<double>(grid_size - 1));
    g.front() = iv.lo;
    g.back() = iv.hi;
    return g;
}

/// Points along each coordinate for a family: the index set for finite
/// families, interval_grid otherwise.
inline std::vector<double> coordinate_grid(const DecisionFamily& family, std::size_t j, std::size_t grid_size) {
    if (family.kind() == FamilyKind::finite) {
        std::vector<double> g(family.finite_rules()->size());
        for (std::size_t k = 0; k < g.size(); ++k)
            g[k] = static_cast<double>(k);
        return g;
    }
    return interval_grid(family.box()[j], grid_size);
}

/// Evaluates f on the tensor grid and keeps the first maximum in lexicographic
/// order (coordinate 0 slowest), i.e. ties go to the smallest beta.
inline OptimizationResult grid_search(const std::vector<std::vector<double>>& axes, const Objective& f,
                                      bool keep_trace = false) {
    std::size_t total = 1;
    for (const auto& a : axes)
        total *= a.size();
    const std::size_t d = axes.size();
    auto point = [&](std::size_t idx) {
        ParamPoint b(d);
        for (std::size_t j = d; j-- > 0;) {
            b[j] = axes[j][idx % axes[j].size()];
            idx /= axes[j].size();
        }
        return b;
    };
    std::vector<double> values(total);
    parallel_for(total, [&](std::size_t i) { values[i] = f(point(i)); });
    std::size_t best = 0;
    for (std::size_t i = 1; i < total; ++i)
        if (values[i] > values[best])
            best = i;
    OptimizationResult r;
    r.beta_hat = point(best);
    r.value = values[best];
    r.evaluations = total;
    if (keep_trace)
        for (std::size_t i = 0; i < total; ++i)
            r.trace.push_back({point(i), values[i]});
    return r;
}

// ---------------------------------------------------------------------------
// Local search

/// Golden-section maximization of a 1-D function on [a, b] (unit coordinates).
inline std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double a, double b,
                                                    double tol, std::size_t& evaluations) {
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    evaluations += 2;
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++evaluations;
    }
    return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

struct NelderMeadOptions {
    double initial_step = 0.1;     // in unit coordinates
    double f_tol = 1e-10;
    double x_tol = 1e-8;
    std::size_t max_evaluations = 0; // 0 = 200 * (d + 1)
};

struct LocalResult {
    std::vector<double> x; // unit coordinates
    double value = 0.0;
    std::size_t evaluations = 0;
};

/// Nelder-Mead maximization in the unit cube; trial points are clamped.
inline LocalResult nelder_mead_unit(const std::function<double(std::span<const double>)>& g, std::vector<double> x0,
                                    const NelderMeadOptions& opt = {}) {
    const std::size_t d = x0.size();
    const std::size_t budget = opt.max_evaluations ? opt.max_evaluations : 200 * (d + 1);
    auto clamp01 = [](std::vector<double> x) {
        for (double& v : x)
            v = std::clamp(v, 0.0, 1.0);
        return x;
    };
    LocalResult out;
    auto eval = [&](const std::vector<double>& x) {
        ++out.evaluations;
        return -g(x); // minimize the negative
    };
    std::vector<std::vector<double>> simplex(d + 1, clamp01(x0));
    for (std::size_t j = 0; j < d; ++j) {
        auto& v = simplex[j + 1];
        v[j] = v[j] + opt.initial_step <= 1.0 ? v[j] + opt.initial_step : v[j] - opt.initial_step;
    }
    std::vector<double> fv(d + 1);
    for (std::size_t i = 0; i <= d; ++i)
        fv[i] = eval(simplex[i]);

    std::vector<std::size_t> order(d + 1);
    while (out.evaluations < budget) {
        for (std::size_t i = 0; i <= d; ++i)
            order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[d - (d > 0 ? 1 : 0)];
        double diam = 0.0;
        for (std::size_t i = 0; i <= d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                diam = std::max(diam, std::abs(simplex[i][j] - simplex[best][j]));
        if (std::abs(fv[worst] - fv[best]) <= opt.f_tol * (1.0 + std::abs(fv[best])) && diam <= opt.x_tol)
            break;
        if (diam <= 1e-14)
            break;

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i)
            if (i != worst)
                for (std::size_t j = 0; j < d; ++j)
                    centroid[j] += simplex[i][j] / static_cast<double>(d);
        auto along = [&](double t) {
            std::vector<double> x(d);
            for (std::size_t j = 0; j < d; ++j)
                x[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
            return clamp01(std::move(x));
        };
        const auto xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            const auto xe = along(-2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                fv[worst] = fe;
            } else {
                simplex[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            simplex[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        const bool outside = fr < fv[worst];
        const auto xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[worst])) {
            simplex[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == best)
                continue;
            for (std::size_t j = 0; j < d; ++j)
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            fv[i] = eval(simplex[i]);
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= d; ++i)
        if (fv[i] < fv[best])
            best = i;
    out.x = simplex[best];
    out.value = -fv[best];
    return out;
}

// ---------------------------------------------------------------------------
// Box-level drivers on an arbitrary objective

inline ParamPoint from_unit(const Box& box, std::span<const double> x) {
    ParamPoint b(box.size());
    for (std::size_t j = 0; j < box.size(); ++j)
        b[j] = std::clamp(box[j].from_unit(x[j]), box[j].lo, box[j].hi);
    return b;
}

inline std::vector<double> to_unit(const Box& box, std::span<const double> beta) {
    std::vector<double> x(box.size());
    for (std::size_t j = 0; j < box.size(); ++j)
        x[j] = std::clamp(box[j].to_unit(beta[j]), 0.0, 1.0);
    return x;
}

/// Halton points (bases 2, 3, 5, ...) with a Cranley-Patterson shift derived
/// from the seed.
inline std::vector<std::vector<double>> halton_points(std::size_t count, std::size_t dim, std::uint64_t seed) {
    static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (dim > std::size(primes))
        throw PreconditionError("halton_points supports at most 16 dimensions");
    RandomStream rs(seed, StreamTag::misc, 0, 0);
    std::vector<double> shift(dim);
    for (auto& s : shift)
        s = rs.uniform();
    std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
    for (std::size_t k = 0; k < count; ++k)
        for (std::size_t j = 0; j < dim; ++j) {
            double f = 1.0, r = 0.0;
            for (std::size_t i = k + 1; i > 0; i /= primes[j]) {
                f /= primes[j];
                r += f * static_cast<double>(i % primes[j]);
            }
            pts[k][j] = std::fmod(r + shift[j], 1.0);
        }
    return pts;
}

/// Nelder-Mead from each start (given in beta coordinates); the result is the
/// best of all starts' initial and final values, ties to the earliest start.
inline OptimizationResult multistart_search(const Box& box, const Objective& f, const std::vector<ParamPoint>& starts,
                                            const NelderMeadOptions& nm = {}) {
    if (starts.empty())
        throw PreconditionError("multistart needs at least one start");
    struct Run {
        ParamPoint beta;
        double value;
        bool improved;
        std::size_t evaluations;
    };
    std::vector<Run> runs(starts.size());
    parallel_for(starts.size(), [&](std::size_t s) {
        const double v0 = f(starts[s]);
        const auto local = nelder_mead_unit([&](std::span<const double> x) { return f(from_unit(box, x)); },
                                            to_unit(box, starts[s]), nm);
        if (local.value > v0)
            runs[s] = {from_unit(box, local.x), local.value, true, local.evaluations + 1};
        else
            runs[s] = {starts[s], v0, false, local.evaluations + 1};
    });
    OptimizationResult r;
    std::size_t best = 0;
    bool any_improved = false;
    for (std::size_t s = 0; s < runs.size(); ++s) {
        r.evaluations += runs[s].evaluations;
        any_improved = any_improved || runs[s].improved;
        if (runs[s].value > runs[best].value)
            best = s;
    }
    r.beta_hat = runs[best].beta;
    r.value = runs[best].value;
    r.warning = !any_improved;
    return r;
}

/// Polishes a 1-D grid maximizer by golden section on the neighbouring cells.
inline OptimizationResult polish_1d(const Interval& iv, const Objective& f, OptimizationResult grid,
                                    std::size_t grid_size, double tol = 1e-9) {
    const double x = iv.to_unit(grid.beta_hat[0]);
    const double cell = 1.0 / static_cast<double>(grid_size - 1);
    const double a = std::max(0.0, x - cell), b = std::min(1.0, x + cell);
    const auto fb = [&](double t) {
        const double beta = std::clamp(iv.from_unit(t), iv.lo, iv.hi);
        return f(std::span<const double>(&beta, 1));
    };
    const auto [t, v] = golden_section_max(fb, a, b, tol, grid.evaluations);
    if (v > grid.value) {
        grid.beta_hat = {std::clamp(iv.from_unit(t), iv.lo, iv.hi)};
        grid.value = v;
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Estimator-level API

namespace detail {

inline Objective estimator_objective(const Dataset& data, const DecisionFamily& family, const EstimatorOptions& est) {
    return [&data, &family, est](std::span<const double> beta) { return estimate(data, family, beta, est).value; };
}

inline OptimizationResult finalize(const Dataset& data, const DecisionFamily& family, const EstimatorOptions& est,
                                   OptimizationResult r) {
    const auto e = estimate(data, family, r.beta_hat, est);
    r.value = e.value;
    r.std_error = e.std_error;
    return r;
}

} // namespace detail

/// Exhaustive tensor grid over the box (dim <= 2); ties to the smallest beta.
inline OptimizationResult grid_argmax(const Dataset& data, const DecisionFamily& family, const EstimatorOptions& est,
                                      std::size_t grid_size = 201, bool keep_trace = false) {
    if (family.dim() > 2)
        throw PreconditionError("grid_argmax supports dim <= 2; use multistart_argmax for " +
                                    std::string(to_string(family.kind())),
                                "dimension_too_large");
    if (grid_size < 2)
        throw PreconditionError("grid_size must be at least 2");
    std::vector<std::vector<double>> axes;
    for (std::size_t j = 0; j < family.dim(); ++j)
        axes.push_back(coordinate_grid(family, j, grid_size));
    return detail::finalize(data, family, est, grid_search(axes, detail::estimator_objective(data, family, est), keep_trace));
}

/// Grid search followed by golden-section polish (dim 1, continuous families).
inline OptimizationResult grid_polish_argmax(const Dataset& data, const DecisionFamily& family,
                                             const EstimatorOptions& est, std::size_t grid_size = 201) {
    auto r = grid_argmax(data, family, est, grid_size);
    if (family.dim() == 1 && family.kind() != FamilyKind::finite)
        r = polish_1d(family.box()[0], detail::estimator_objective(data, family, est), std::move(r), grid_size);
    return detail::finalize(data, family, est, std::move(r));
}

/// Start points: `first` (if any), the family's plug-in point (if any), then
/// quasi-random Halton points, `starts` in total.
inline std::vector<ParamPoint> start_points(const Dataset& data, const DecisionFamily& family, std::size_t starts,
                                            std::uint64_t seed, std::optional<ParamPoint> first = std::nullopt) {
    std::vector<ParamPoint> out;
    if (first)
        out.push_back(family.clamp(*first));
    else if (auto plug = plugin_for(family, data))
        out.push_back(plug->beta);
    if (out.size() < starts) {
        const auto pts = halton_points(starts - out.size(), family.dim(), seed);
        for (const auto& x : pts)
            out.push_back(from_unit(family.box(), x));
    }
    out.resize(std::min(out.size(), starts));
    return out;
}

inline OptimizationResult multistart_argmax(const Dataset& data, const DecisionFamily& family,
                                            const EstimatorOptions& est, std::size_t starts = 8,
                                            std::uint64_t seed = 0, std::optional<ParamPoint> first = std::nullopt,
                                            const NelderMeadOptions& nm = {}) {
    if (family.kind() == FamilyKind::finite)
        throw UnsupportedError("multistart_argmax needs a continuous family; use grid_argmax for finite families");
    if (starts < 1)
        throw PreconditionError("starts must be at least 1");
    auto r = multistart_search(family.box(), detail::estimator_objective(data, family, est),
                               start_points(data, family, starts, seed, std::move(first)), nm);
    return detail::finalize(data, family, est, std::move(r));
}

enum class Strategy { automatic, grid, multistart };

struct OptimizeOptions {
    Strategy strategy = Strategy::automatic; // grid (+ polish) for dim 1 or finite, multistart otherwise
    std::size_t grid_size = 201;
    std::size_t starts = 8;
    std::uint64_t seed = 0;
    bool polish = true;
};

inline OptimizationResult optimize(const Dataset& data, const DecisionFamily& family, const EstimatorOptions& est,
                                   const OptimizeOptions& opt = {}) {
    Strategy s = opt.strategy;
    if (s == Strategy::automatic)
        s = (family.dim() == 1 || family.kind() == FamilyKind::finite) ? Strategy::grid : Strategy::multistart;
    if (s == Strategy::grid)
        return opt.polish ? grid_polish_argmax(data, family, est, opt.grid_size)
                          : grid_argmax(data, family, est, opt.grid_size);
    return multistart_argmax(data, family, est, opt.starts, opt.seed);
}

// ---------------------------------------------------------------------------
// Curves and cost sweeps

struct WelfareCurve {
    std::size_t coordinate = 0;
    std::vector<ParamPoint> betas;
    std::vector<WelfareEstimate> estimates;
    Method method = Method::assure;
};

inline WelfareCurve welfare_curve(const Dataset& data, const DecisionFamily& family, const EstimatorOptions& est,
                                  std::size_t coordinate, std::size_t grid_size, const ParamPoint& fixed) {
    if (coordinate >= family.dim())
        throw PreconditionError("coordinate " + std::to_string(coordinate) + " out of range for a " +
                                    std::to_string(family.dim()) + "-dimensional family",
                                "coordinate_range");
    if (fixed.size() != family.dim())
        throw PreconditionError("fixed point has the wrong dimension", "beta_dimension");
    const auto axis = coordinate_grid(family, coordinate, grid_size);
    for (std::size_t k = 1; k < axis.size(); ++k)
        if (!(axis[k] > axis[k - 1]))
            throw PreconditionError("box interval for the varied coordinate is degenerate", "invalid_box");
    WelfareCurve c;
    c.coordinate = coordinate;
    c.method = est.method;
    c.betas.assign(axis.size(), fixed);
    for (std::size_t k = 0; k < axis.size(); ++k)
        c.betas[k][coordinate] = axis[k];
    c.estimates.resize(axis.size());
    parallel_for(axis.size(), [&](std::size_t k) { c.estimates[k] = estimate(data, family, c.betas[k], est); });
    return c;
}

struct CostSweepRow {
    double cost = 0.0;
    OptimizationResult result;
};

/// Re-optimizes with every unit's cost set to each value in `costs`.
inline std::vector<CostSweepRow> implied_cost_sweep(const Dataset& data, const DecisionFamily& family,
                                                    const EstimatorOptions& est, const std::vector<double>& costs,
                                                    const OptimizeOptions& opt = {}) {
    if (costs.empty())
        throw PreconditionError("cost list is empty", "empty_costs");
    if (family.kind() == FamilyKind::ensemble)
        throw UnsupportedError("cost sweeps are not supported for the data-fitted ensemble family");
    std::vector<CostSweepRow> rows(costs.size());
    for (std::size_t k = 0; k < costs.size(); ++k) {
        if (!std::isfinite(costs[k]))
            throw PreconditionError("costs must be finite", "empty_costs");
        const Dataset d = data.with_constant_cost(costs[k]);
        rows[k] = {costs[k], optimize(d, family, est, opt)};
    }
    return rows;
}

/// The cost at which coordinate `coordinate` of beta_hat crosses `target`,
/// by linear interpolation between adjacent sweep rows; nullopt if never.
inline std::optional<double> back_out_cost(const std::vector<CostSweepRow>& rows, double target,
                                           std::size_t coordinate = 0) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double b = rows[k].result.beta_hat.at(coordinate);
        if (b == target)
            return rows[k].cost;
        if (k == 0)
            continue;
        const double a = rows[k - 1].result.beta_hat.at(coordinate);
        if ((a - target) * (b - target) < 0.0) {
            const double t = (target - a) / (b - a);
            return rows[k - 1].cost + t * (rows[k].cost - rows[k - 1].cost);
        }
    }
    return std::nullopt;
}

} // namespace assure
