// cli.hpp
//
// The assure command line: estimate, optimize, curve, sweep-costs, simulate,
// check. JSON goes to `out`, diagnostics to `err`. Exit codes: 0 success,
// 1 domain or input error (`ERROR <code>: <detail>`), 2 usage error.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "assure/baselines.hpp"
#include "assure/classes.hpp"
#include "assure/error.hpp"
#include "assure/estimators.hpp"
#include "assure/json_io.hpp"
#include "assure/model.hpp"
#include "assure/optimize.hpp"
#include "assure/parallel.hpp"
#include "assure/sim.hpp"
#include "assure/specfun.hpp"

namespace assure::cli {

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

/// Special-function spot values (30-digit references) and the bias envelope.
inline std::vector<CheckResult> self_tests() {
    std::vector<CheckResult> out;
    auto add = [&](std::string name, bool pass, std::string detail) {
        out.push_back({std::move(name), pass, std::move(detail)});
    };

    struct SiRef {
        double x, si;
    };
    static constexpr SiRef si_refs[] = {
        {0.5, 0.49310741804306668916}, {1.0, 0.94608307036718301494}, {2.0, 1.6054129768026948486},
        {3.9, 1.7765013604478054544},  {4.1, 1.7387436264917689967},  {10.0, 1.6583475942188740493},
        {25.0, 1.5314825509999613226}, {39.9, 1.585039676127279339},  {40.5, 1.5938372573281597919},
        {100.0, 1.5622254668890562934}, {1000.0, 1.5702331219687712181}};
    double worst = 0.0;
    for (const auto& r : si_refs) {
        worst = std::max(worst, std::abs(specfun::sine_integral(r.x) - r.si));
        worst = std::max(worst, std::abs(specfun::sine_integral(-r.x) + r.si));
        worst = std::max(worst, std::abs(specfun::sine_integral(r.x, specfun::AccuracySpec{}) - r.si));
    }
    add("sine_integral", worst <= 1e-12, "max abs error " + detail::format_double(worst));

    double sym = 0.0;
    for (double x = -60.0; x <= 60.0; x += 0.37)
        sym = std::max(sym, std::abs(specfun::cumulative_sinc(x) + specfun::cumulative_sinc(-x) - 1.0));
    add("cumulative_sinc_symmetry", sym <= 1e-14, "max deviation " + detail::format_double(sym));

    const double sinc_err = std::abs(specfun::sinc(1.0) - 0.26784853340116378631);
    add("sinc", sinc_err <= 1e-15, "abs error " + detail::format_double(sinc_err));

    const double cdf_err = std::max(std::abs(specfun::normal_cdf(1.3) - 0.90319951541438967446),
                                    std::abs(specfun::normal_cdf(-5.0) / 2.8665157187919391167e-7 - 1.0));
    double q_err = 0.0;
    for (double p : {1e-10, 0.01, 0.3, 0.5, 0.9, 0.999})
        q_err = std::max(q_err, std::abs(specfun::normal_cdf(specfun::normal_quantile(p)) / p - 1.0));
    add("normal", cdf_err <= 1e-14 && q_err <= 1e-12,
        "cdf error " + detail::format_double(cdf_err) + ", quantile round trip " + detail::format_double(q_err));

    const auto env = bias_envelope_check({1.0, 0.5, 0.25}, {-2.0, -1.0, -0.3, 0.0, 0.3, 1.0, 2.0}, {-1.0, 0.0, 1.0},
                                         {0.5, 1.0, 2.0}, 0.0);
    add("bias_envelope", env.pass,
        std::to_string(env.cells.size() - env.failures().size()) + "/" + std::to_string(env.cells.size()) +
            " cells within bound");
    return out;
}

namespace detail {

struct Common {
    std::string data_path;
    std::string family_path;
    std::string method = "assure";
    std::string mode;
    std::optional<double> h, eps;
};

inline void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--data", c.data_path, "CSV with columns y,sigma,k[,x1..xp]")->required();
    sub->add_option("--family", c.family_path, "family config JSON")->required();
    sub->add_option("--method", c.method, "assure | cb | poisson")->check(CLI::IsMember({"assure", "cb", "poisson"}));
    sub->add_option("--mode", c.mode, "gaussian | poisson (default follows --method)")
        ->check(CLI::IsMember({"gaussian", "poisson"}));
    sub->add_option("--h", c.h, "ASSURE bandwidth");
    sub->add_option("--eps", c.eps, "coupled-bootstrap epsilon");
}

struct Loaded {
    Dataset data;
    DecisionFamily family;
    EstimatorOptions est;
};

inline Loaded load(const Common& c) {
    const Method m = method_from_string(c.method);
    Likelihood mode = m == Method::poisson ? Likelihood::poisson : Likelihood::gaussian;
    if (c.mode == "gaussian")
        mode = Likelihood::gaussian;
    else if (c.mode == "poisson")
        mode = Likelihood::poisson;
    Dataset data = load_dataset_file(c.data_path, mode);
    DecisionFamily family = family_from_json(load_json_file(c.family_path), &data);
    EstimatorOptions est;
    est.method = m;
    est.h = c.h;
    est.eps = c.eps;
    return {std::move(data), std::move(family), est};
}

struct OptimizerFlags {
    std::optional<std::size_t> grid;
    std::optional<std::size_t> starts;
    std::uint64_t seed = 0;
    bool no_polish = false;
};

inline void add_optimizer(CLI::App* sub, OptimizerFlags& o) {
    auto* g = sub->add_option("--grid", o.grid, "grid search with N points per coordinate");
    auto* s = sub->add_option("--starts", o.starts, "Nelder-Mead multistart with S starts");
    g->excludes(s);
    sub->add_option("--seed", o.seed, "seed for start points");
    sub->add_flag("--no-polish", o.no_polish, "skip golden-section polishing of 1-d grid results");
}

inline OptimizeOptions optimize_options(const OptimizerFlags& o) {
    OptimizeOptions opt;
    opt.seed = o.seed;
    opt.polish = !o.no_polish;
    if (o.grid) {
        opt.strategy = Strategy::grid;
        opt.grid_size = *o.grid;
    } else if (o.starts) {
        opt.strategy = Strategy::multistart;
        opt.starts = *o.starts;
    }
    return opt;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("io", "cannot write '" + path + "'");
    return f;
}

inline void print(std::ostream& out, const Json& j) { out << dump_json(j) << '\n'; }

} // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Welfare estimation and selection-rule optimization", "assure"};
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (default: ASSURE_THREADS, else 1)");

    detail::Common est_c, opt_c, curve_c, sweep_c;
    std::string beta_text;
    auto* estimate_cmd = app.add_subcommand("estimate", "welfare estimate at one parameter point");
    detail::add_common(estimate_cmd, est_c);
    estimate_cmd->add_option("--beta", beta_text, "comma-separated parameter point")->required();

    detail::OptimizerFlags opt_f, sweep_f;
    std::string decisions_path;
    auto* optimize_cmd = app.add_subcommand("optimize", "maximize the welfare estimate over the family box");
    detail::add_common(optimize_cmd, opt_c);
    detail::add_optimizer(optimize_cmd, opt_f);
    optimize_cmd->add_option("--decisions", decisions_path, "write the 0/1 decision column as CSV");

    std::size_t coordinate = 0, curve_grid = 201;
    std::string fixed_text, curve_out;
    auto* curve_cmd = app.add_subcommand("curve", "welfare curve along one coordinate");
    detail::add_common(curve_cmd, curve_c);
    curve_cmd->add_option("--coordinate", coordinate, "0-based coordinate to vary");
    curve_cmd->add_option("--grid", curve_grid, "grid points");
    curve_cmd->add_option("--fixed", fixed_text, "values of the other coordinates (default: box center)");
    curve_cmd->add_option("--out", curve_out, "curve CSV path");

    std::string costs_text;
    std::optional<double> target;
    std::size_t sweep_coordinate = 0;
    auto* sweep_cmd = app.add_subcommand("sweep-costs", "re-optimize at each cost and back out implied costs");
    detail::add_common(sweep_cmd, sweep_c);
    detail::add_optimizer(sweep_cmd, sweep_f);
    sweep_cmd->add_option("--costs", costs_text, "comma-separated costs")->required();
    sweep_cmd->add_option("--target", target, "parameter value whose implied cost is backed out");
    sweep_cmd->add_option("--coordinate", sweep_coordinate, "coordinate compared against --target");

    std::string scenario_path, report_out, report_csv;
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::size_t> sim_reps;
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo comparison of methods on a scenario");
    simulate_cmd->add_option("--scenario", scenario_path, "scenario JSON")->required();
    simulate_cmd->add_option("--out", report_out, "report JSON path (default: stdout)");
    simulate_cmd->add_option("--csv", report_csv, "per-rep CSV path");
    simulate_cmd->add_option("--seed", sim_seed, "override the scenario seed");
    simulate_cmd->add_option("--reps", sim_reps, "override the scenario replication count");

    auto* check_cmd = app.add_subcommand("check", "special-function and bias-envelope self-tests");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    set_thread_count(threads);
    try {
        if (*estimate_cmd) {
            const auto L = detail::load(est_c);
            const ParamPoint beta = parse_point(beta_text);
            const auto e = estimate(L.data, L.family, beta, L.est);
            Json j = estimate_to_json(e);
            j["method"] = to_string(L.est.method);
            j["family"] = to_string(L.family.kind());
            j["beta"] = assure::detail::point_json(beta);
            detail::print(out, j);
        } else if (*optimize_cmd) {
            const auto L = detail::load(opt_c);
            const auto opt = detail::optimize_options(opt_f);
            const auto r = optimize(L.data, L.family, L.est, opt);
            Json j = optimization_to_json(r);
            j["method"] = to_string(L.est.method);
            j["family"] = to_string(L.family.kind());
            j["n"] = L.data.size();
            j["seed"] = opt.seed;
            if (const auto fit = plugin_for(L.family, L.data))
                j["plugin"] = plugin_to_json(L.family, *fit);
            const auto d = decisions(L.data, L.family, r.beta_hat);
            std::size_t selected = 0;
            for (int v : d)
                selected += static_cast<std::size_t>(v);
            j["selected"] = selected;
            if (!decisions_path.empty()) {
                auto f = detail::open_output(decisions_path);
                f << "unit,decision\n";
                for (std::size_t i = 0; i < d.size(); ++i)
                    f << i << ',' << d[i] << '\n';
            }
            detail::print(out, j);
        } else if (*curve_cmd) {
            const auto L = detail::load(curve_c);
            const ParamPoint fixed = fixed_text.empty() ? L.family.box_center() : parse_point(fixed_text);
            const auto c = welfare_curve(L.data, L.family, L.est, coordinate, curve_grid, fixed);
            const double h = c.estimates.empty() ? 0.0 : c.estimates.front().h;
            if (!curve_out.empty()) {
                auto f = detail::open_output(curve_out);
                for (std::size_t k = 0; k < L.family.dim(); ++k)
                    f << "beta_" << (k + 1) << ',';
                f << "estimate,stderr\n";
                for (std::size_t i = 0; i < c.betas.size(); ++i) {
                    for (double b : c.betas[i])
                        f << assure::detail::format_double(b) << ',';
                    f << assure::detail::format_double(c.estimates[i].value) << ','
                      << assure::detail::format_double(c.estimates[i].std_error) << '\n';
                }
            }
            Json pts = Json::array();
            for (std::size_t i = 0; i < c.betas.size(); ++i)
                pts.push_back({{"beta", assure::detail::point_json(c.betas[i])},
                               {"estimate", c.estimates[i].value},
                               {"stderr", c.estimates[i].std_error}});
            Json j;
            j["method"] = to_string(c.method);
            j["h"] = h;
            j["n"] = L.data.size();
            j["seed"] = nullptr;
            j["family"] = to_string(L.family.kind());
            j["coordinate"] = c.coordinate;
            j["points"] = pts;
            detail::print(out, j);
        } else if (*sweep_cmd) {
            const auto L = detail::load(sweep_c);
            const auto costs = parse_point(costs_text);
            const auto rows = implied_cost_sweep(L.data, L.family, L.est, costs, detail::optimize_options(sweep_f));
            Json jr = Json::array();
            for (const auto& row : rows)
                jr.push_back({{"cost", row.cost},
                              {"beta_hat", assure::detail::point_json(row.result.beta_hat)},
                              {"value", row.result.value},
                              {"std_error", row.result.std_error}});
            Json j;
            j["method"] = to_string(L.est.method);
            j["family"] = to_string(L.family.kind());
            j["rows"] = jr;
            if (target) {
                if (sweep_coordinate >= L.family.dim())
                    throw PreconditionError("--coordinate out of range", "coordinate_range");
                j["target"] = *target;
                j["coordinate"] = sweep_coordinate;
                const auto k = back_out_cost(rows, *target, sweep_coordinate);
                j["implied_cost"] = k ? Json(*k) : Json(nullptr);
            }
            detail::print(out, j);
        } else if (*simulate_cmd) {
            ScenarioSpec s = load_scenario_file(scenario_path);
            if (sim_seed)
                s.seed = *sim_seed;
            if (sim_reps) {
                s.reps = *sim_reps;
                s.validate();
            }
            const SimReport r = run_scenario(s);
            const Json j = report_to_json(r);
            if (!report_csv.empty()) {
                auto f = detail::open_output(report_csv);
                write_report_csv(f, r);
            }
            if (report_out.empty()) {
                detail::print(out, j);
            } else {
                auto f = detail::open_output(report_out);
                detail::print(f, j);
            }
        } else if (*check_cmd) {
            const auto results = self_tests();
            bool all = true;
            Json arr = Json::array();
            for (const auto& r : results) {
                all = all && r.pass;
                arr.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
                if (!r.pass)
                    err << "check " << r.name << " failed: " << r.detail << '\n';
            }
            detail::print(out, Json{{"pass", all}, {"checks", arr}});
            if (!all) {
                err << "ERROR check_failed: one or more self-tests failed\n";
                return 1;
            }
        }
    } catch (const Error& e) {
        err << "ERROR " << e.code() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "ERROR internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace assure::cli
