// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "assure/assure.hpp"
#include "assure/cli.hpp"

using namespace assure;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Si(x) by adaptive Gauss-Kronrod over unit-length panels.
double si_quadrature(double x) {
    using boost::math::quadrature::gauss_kronrod;
    const double ax = std::abs(x);
    auto f = [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; };
    double sum = 0.0;
    for (double a = 0.0; a < ax; a += 1.0)
        sum += gauss_kronrod<double, 31>::integrate(f, a, std::min(a + 1.0, ax), 8, 1e-15);
    return x < 0.0 ? -sum : sum;
}

Outcome special_functions() {
    double worst = 0.0, sym = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = -100.0 + 200.0 * (i + 0.5) / 10000.0;
        worst = std::max(worst, std::abs(specfun::sine_integral(x) - si_quadrature(x)));
        sym = std::max(sym, std::abs(specfun::cumulative_sinc(x) + specfun::cumulative_sinc(-x) - 1.0));
    }
    return {worst <= 1e-12 && sym <= 1e-14, "max |Si - quadrature| " + fmt("%.3g", worst) + ", symmetry " + fmt("%.3g", sym)};
}

Outcome bias_envelope() {
    const auto rep = bias_envelope_check({1.0, 0.5, 0.25}, {-2, -1, -0.3, 0, 0.3, 1, 2}, {-1, 0, 1}, {0.5, 1, 2}, 0.0);
    double slack = 1e300;
    for (const auto& c : rep.cells)
        slack = std::min(slack, c.bound + 1e-9 - std::abs(c.bias));
    return {rep.pass, std::to_string(rep.cells.size()) + " cells, " + std::to_string(rep.failures().size()) +
                          " failures, min slack " + fmt("%.3g", slack)};
}

Outcome poisson_unbiased() {
    double worst = 0.0;
    for (double mu : {0.5, 1.5, 5.0})
        for (double k : {0.0, 0.5})
            for (std::int64_t c = 0; c <= 10; ++c) {
                const boost::math::poisson_distribution<double> P(mu);
                double e = 0.0;
                for (int y = 0; y <= 100; ++y)
                    e += boost::math::pdf(P, y) * poisson_summand(y, k, c);
                worst = std::max(worst, std::abs(e - (mu - k) * poisson_tail(mu, c)));
            }
    return {worst <= 1e-10, "max deviation " + fmt("%.3g", worst)};
}

// Central differences with one Richardson step.
double richardson(const std::function<double(double)>& f, double step) {
    const double d1 = (f(step) - f(-step)) / (2.0 * step);
    const double d2 = (f(step / 2) - f(-step / 2)) / step;
    return (4.0 * d2 - d1) / 3.0;
}

Outcome derivatives() {
    RandomStream r(2024, StreamTag::misc, 0, 0);
    const FamilyKind kinds[] = {FamilyKind::threshold,   FamilyKind::tstat,       FamilyKind::linear_shrink,
                                FamilyKind::fay_herriot, FamilyKind::close_gauss, FamilyKind::ensemble};
    double worst = 0.0;
    std::string worst_where;
    for (int t = 0; t < 50; ++t) {
        const FamilyKind kind = kinds[t % 6];
        const std::size_t n = 30 + static_cast<std::size_t>(170 * r.uniform());
        std::vector<double> y, s, k, x;
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = r.normal();
            s.push_back(std::exp(0.4 * r.normal()));
            y.push_back(mu + s.back() * r.normal());
            k.push_back(0.3 * r.uniform());
            x.push_back(1.0);
            x.push_back(mu + 0.5 * r.normal());
        }
        const Dataset d(y, s, k, x, 2);
        DecisionFamily fam = DecisionFamily::threshold();
        ParamPoint beta;
        switch (kind) {
        case FamilyKind::threshold: beta = {r.normal()}; break;
        case FamilyKind::tstat:
            fam = DecisionFamily::tstat();
            beta = {r.normal()};
            break;
        case FamilyKind::linear_shrink:
            fam = DecisionFamily::linear_shrink();
            beta = {0.5 * r.normal(), 0.3 + r.uniform()};
            break;
        case FamilyKind::fay_herriot:
            fam = DecisionFamily::fay_herriot(2);
            beta = {0.2 + r.uniform(), 0.3 * r.normal(), 0.5 + 0.5 * r.uniform()};
            break;
        case FamilyKind::close_gauss:
            fam = DecisionFamily::close_gauss();
            beta = {0.3 * r.normal(), 0.3 * r.normal(), -1.0 + r.uniform(), 0.5 * r.normal()};
            break;
        default:
            fam = fit_ensemble_family(d);
            beta = {0.2 + 0.8 * r.uniform()};
            break;
        }
        const auto der = assure_derivative(d, fam, beta, 2);
        const std::size_t m = fam.dim();
        double gscale = 0.0, hscale = 0.0;
        for (double g : der.gradient)
            gscale = std::max(gscale, std::abs(g));
        for (double v : der.hessian)
            hscale = std::max(hscale, std::abs(v));
        for (std::size_t a = 0; a < m; ++a) {
            const double step = 1e-4 * (1.0 + std::abs(beta[a]));
            const double fd = richardson(
                [&](double e) {
                    auto b = beta;
                    b[a] += e;
                    return assure_estimate(d, fam, b).value;
                },
                step);
            const double rel_g = std::abs(der.gradient[a] - fd) / std::max(std::abs(fd), 1e-3 * gscale);
            if (rel_g > worst) {
                worst = rel_g;
                worst_where = std::string(to_string(kind)) + " gradient";
            }
            for (std::size_t b = 0; b < m; ++b) {
                const double fd2 = richardson(
                    [&](double e) {
                        auto p = beta;
                        p[a] += e;
                        return assure_derivative(d, fam, p, 1).gradient[b];
                    },
                    step);
                const double rel_h = std::abs(der.hessian[a * m + b] - fd2) / std::max(std::abs(fd2), 1e-3 * hscale);
                if (rel_h > worst) {
                    worst = rel_h;
                    worst_where = std::string(to_string(kind)) + " hessian";
                }
            }
        }
    }
    return {worst <= 1e-5, "50 triples, max relative error " + fmt("%.3g", worst) + " (" + worst_where + ")"};
}

Outcome coupled_bootstrap() {
    RandomStream cfg(77, StreamTag::misc, 0, 0);
    double worst_z = 0.0;
    for (std::uint32_t c = 0; c < 20; ++c) {
        const double y = 2.0 * cfg.normal(), sigma = std::exp(0.5 * cfg.normal()), k = 0.5 * cfg.uniform();
        const double delta = y + sigma * cfg.normal(), eps = 0.1 + 0.6 * cfg.uniform();
        RandomStream r(77, StreamTag::coupling, c, 0);
        const std::size_t draws = 1000000;
        double sum = 0.0;
        for (std::size_t j = 0; j < draws; ++j) {
            const double w = r.normal();
            sum += (y - sigma * w / eps - k) * ((y + eps * sigma * w) > delta ? 1.0 : 0.0);
        }
        const double mean = sum / draws;
        // exact variance of (a - b W) 1{W > t}
        const double a = y - k, b = sigma / eps, t = (delta - y) / (eps * sigma);
        const double q = specfun::normal_cdf(-t), phi = specfun::normal_pdf(t);
        const double expected = cb_summand(y, Context{sigma, k}, delta, eps);
        const double var = a * a * q - 2.0 * a * b * phi + b * b * (q + t * phi) - expected * expected;
        const double diff = std::abs(mean - expected);
        if (diff > 0.0)
            worst_z = std::max(worst_z, diff / std::sqrt(std::max(var, 0.0) / draws));
    }
    const Context z{1.0, 0.0};
    const double truth = specfun::normal_cdf(0.7);
    const double ratio = (expected_cb_summand(1.0, z, 0.3, 0.5) - truth) / (expected_cb_summand(1.0, z, 0.3, 0.25) - truth);
    return {worst_z <= 3.0 && ratio >= 2.5 && ratio <= 5.5,
            "max |z| " + fmt("%.3g", worst_z) + " over 20 configurations, bias ratio " + fmt("%.4g", ratio)};
}

const std::vector<std::size_t> n_grid{250, 1000, 4000, 16000};

std::string rate_detail(const RateTable& t) {
    std::string s = "slope " + fmt("%.3f", t.slope) + " (jackknife se " + fmt("%.3f", t.slope_std_error) + "); means";
    for (const auto& row : t.rows)
        s += " " + fmt("%.3g", row.mean);
    return s;
}

Outcome general_rate() {
    ScenarioSpec s;
    s.generator.kind = GeneratorSpec::Kind::two_point;
    s.generator.h = 1.0;
    s.seed = 3;
    const auto t = rate_experiment(s, n_grid, 200, "assure:threshold");
    return {t.slope <= -0.35, rate_detail(t)};
}

ScenarioSpec fast_rate_scenario() {
    ScenarioSpec s;
    s.generator.kind = GeneratorSpec::Kind::bimodal;
    s.generator.a = 1.0;
    s.generator.weight = 0.55;
    s.seed = 7;
    return s;
}

Outcome fast_rate() {
    const auto t = rate_experiment(fast_rate_scenario(), n_grid, 200, "assure:threshold");
    return {t.slope <= -0.7, rate_detail(t)};
}

Outcome dominance() {
    ScenarioSpec s;
    s.generator.kind = GeneratorSpec::Kind::bimodal;
    s.generator.a = 1.5;
    s.generator.weight = 0.3;
    s.sigma.kind = SigmaSpec::Kind::lognormal;
    s.sigma.sdlog = 0.5;
    s.cost.value = 0.5;
    s.n = 1000;
    s.reps = 40;
    s.seed = 11;
    s.methods = {"assure:linear_shrink", "plugin:linear_shrink"};
    const auto r = run_scenario(s);
    const auto& a = r.methods[0];
    const auto& p = r.methods[1];
    std::vector<double> diff;
    std::size_t argmax_ok = 0;
    for (std::size_t i = 0; i < s.reps; ++i) {
        diff.push_back(a.reps[i].welfare - p.reps[i].welfare);
        argmax_ok += a.reps[i].estimate >= a.reps[i].estimate_at_plugin ? 1 : 0;
    }
    const auto d = summarize_values(diff);
    const bool welfare_ok = a.welfare.mean >= p.welfare.mean - d.std_error;
    return {welfare_ok && argmax_ok == s.reps,
            "welfare " + fmt("%.5f", a.welfare.mean) + " vs plug-in " + fmt("%.5f", p.welfare.mean) +
                " (paired diff " + fmt("%.5f", d.mean) + ", se " + fmt("%.5f", d.std_error) + "); in-sample argmax " +
                std::to_string(argmax_ok) + "/" + std::to_string(s.reps)};
}

Outcome uniform_gap() {
    const auto t = uniform_gap_experiment(fast_rate_scenario(), n_grid, 100, FamilyKind::threshold, 501);
    return {t.slope <= -0.35, rate_detail(t)};
}

std::string run_cli_capture(std::vector<std::string> args, int& code) {
    args.insert(args.begin(), "assure");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return out.str() + err.str();
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "assure_acceptance";
    fs::create_directories(dir);
    const auto csv = (dir / "units.csv").string();
    {
        ScenarioSpec s = fast_rate_scenario();
        s.n = 800;
        s.sigma.kind = SigmaSpec::Kind::lognormal;
        s.methods = {"assure:threshold"};
        const auto inst = make_instance(s);
        std::ofstream f(csv);
        write_dataset(f, draw_dataset(s, inst, 0));
    }
    const auto family = (dir / "family.json").string();
    {
        std::ofstream f(family);
        f << R"({"kind": "linear_shrink"})";
    }
    const std::string scenario = std::string(ASSURE_SAMPLES) + "/scenario_bimodal.json";
    const std::vector<std::vector<std::string>> commands = {
        {"simulate", "--scenario", scenario, "--seed", "99"},
        {"optimize", "--data", csv, "--family", family, "--starts", "8", "--seed", "5"},
        {"optimize", "--data", csv, "--family", family, "--grid", "41"}};
    std::size_t same = 0;
    bool ok = true;
    for (const auto& cmd : commands) {
        auto one = cmd, eight = cmd;
        one.insert(one.begin(), {"--threads", "1"});
        eight.insert(eight.begin(), {"--threads", "8"});
        int c1 = 0, c8 = 0;
        const auto o1 = run_cli_capture(one, c1);
        const auto o8 = run_cli_capture(eight, c8);
        const bool match = c1 == 0 && c8 == 0 && o1 == o8;
        same += match ? 1 : 0;
        ok = ok && match;
    }
    set_thread_count(0);
    return {ok, std::to_string(same) + "/" + std::to_string(commands.size()) + " commands byte-identical"};
}

} // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const Criterion criteria[] = {{1, "special functions", special_functions},
                                  {2, "bias envelope", bias_envelope},
                                  {3, "poisson unbiasedness", poisson_unbiased},
                                  {4, "derivative fidelity", derivatives},
                                  {5, "coupled bootstrap", coupled_bootstrap},
                                  {6, "general-rate regret slope", general_rate},
                                  {7, "fast-rate regret slope", fast_rate},
                                  {8, "dominance over plug-in", dominance},
                                  {9, "uniform-gap decay", uniform_gap},
                                  {10, "determinism", determinism}};
    bool all = true;
    std::vector<int> only;
    for (int i = 1; i < argc; ++i)
        only.push_back(std::atoi(argv[i]));
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end())
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all = all && o.pass;
        std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
