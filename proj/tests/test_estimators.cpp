#include <cmath>
#include <numbers>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "assure/estimators.hpp"
#include "assure/rng.hpp"

using namespace assure;

namespace {

template <class Fn>
std::string error_code(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return "none";
}

struct Sample {
    Dataset data;
    GroundTruth truth;
};

Sample draw(std::size_t n, std::uint64_t seed, double scale = 1.0, double shift = 0.0) {
    std::vector<double> y, s, k, mu;
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream r(seed, StreamTag::misc, 0, static_cast<std::uint32_t>(i));
        const double m = r.normal();
        const double sig = std::exp(0.4 * r.normal());
        mu.push_back(scale * m + shift);
        s.push_back(scale * sig);
        k.push_back(scale * 0.1 * r.uniform() + shift);
        y.push_back(scale * (m + sig * r.normal()) + shift);
    }
    return {Dataset(y, s, k, {}, 0), GroundTruth{mu}};
}

} // namespace

TEST(AssureSummand, ReferenceValues) {
    const Context unit{1.0, 0.0};
    for (double y : {-1.0, 0.0, 2.5})
        EXPECT_NEAR(assure_summand(y, unit, y, 0.5), y / 2 - 0.6366197723675814, 1e-15);
    EXPECT_NEAR(assure_summand(5.0, unit, 0.0, 0.25), 4.9059832984504503133, 1e-14);
    EXPECT_NEAR(assure_summand(1.3, Context{0.7, 0.4}, -0.2, 0.45), 1.0116253644917364696, 1e-15);
    EXPECT_THROW(assure_summand(1.0, unit, 0.0, 0.0), PreconditionError);
}

TEST(AssureSummand, TranslationAndScale) {
    for (double c : {-3.0, 0.7, 12.0}) {
        const double a = assure_summand(1.1, Context{0.8, 0.3}, 0.5, 0.4);
        const double b = assure_summand(1.1 + c, Context{0.8, 0.3 + c}, 0.5 + c, 0.4);
        EXPECT_NEAR(a, b, 1e-13 * (1 + std::abs(c)));
    }
    for (double c : {0.1, 2.0, 50.0}) {
        const double a = assure_summand(1.1, Context{0.8, 0.3}, 0.5, 0.4);
        const double b = assure_summand(c * 1.1, Context{c * 0.8, c * 0.3}, c * 0.5, 0.4);
        EXPECT_NEAR(c * a, b, 1e-13 * c);
    }
}

TEST(AssureSummand, SineIntegralFormAgrees) {
    for (double y = -6.0; y <= 6.0; y += 0.37)
        for (double h : {0.2, 0.5, 1.0}) {
            const Context z{1.3, 0.2};
            const double a = assure_summand(y, z, 0.4, h), b = assure_summand_psi(y, z, 0.4, h);
            EXPECT_NEAR(a, b, 1e-13 * (1.0 + std::abs(a)));
        }
}

TEST(AssureSummand, SlopesMatchFiniteDifferences) {
    const double step = 1e-5;
    for (double y : {-2.0, 0.1, 0.9, 3.0})
        for (double delta : {-1.0, 0.3, 1.7}) {
            const Context z{0.8, 0.25};
            const double h = 0.45;
            const auto s = assure_summand_slopes(y, z, delta, h);
            const double fd1 =
                (assure_summand(y, z, delta + step, h) - assure_summand(y, z, delta - step, h)) / (2 * step);
            const double fd2 = (assure_summand_slopes(y, z, delta + step, h).d1 -
                                assure_summand_slopes(y, z, delta - step, h).d1) /
                               (2 * step);
            EXPECT_NEAR(s.d1, fd1, 1e-7 * (1 + std::abs(fd1)));
            EXPECT_NEAR(s.d2, fd2, 1e-6 * (1 + std::abs(fd2)));
        }
}

TEST(AssureSummand, BiasWithinEnvelope) {
    const Context unit{1.0, 0.0};
    const double e = expected_assure_summand(1.0, unit, 0.0, 0.5);
    EXPECT_NEAR(e, 0.83592716758949063618, 1e-12);
    const double bound = assure_bias_bound(1.0, 0.0, 0.5);
    EXPECT_NEAR(bound, 0.033833820809153172973, 1e-16);
    EXPECT_LE(std::abs(e - 0.84134474606854294859), bound);
    EXPECT_NEAR(assure_bias_bound(1.0, 0.0, 0.25), 2.0966414243906989926e-5, 1e-19);
    EXPECT_NEAR(expected_assure_summand(-0.3, Context{2.0, 0.5}, 1.0, 0.25), -0.20627874950007593766, 1e-12);
}

TEST(AssureEstimate, SelectAllAndNothingLimits) {
    const Dataset d({1.0, 2.0, 4.0, -0.5}, {1, 1, 1, 1}, {0.5, 0.5, 0.5, 0.5}, {}, 0);
    const auto wide = DecisionFamily::threshold(Interval{-1e6, 1e6});
    const auto all = assure_estimate(d, wide, std::vector<double>{-1e6});
    EXPECT_NEAR(all.value, (0.5 + 1.5 + 3.5 - 1.0) / 4, 1e-6);
    const auto none = assure_estimate(d, wide, std::vector<double>{1e6});
    EXPECT_NEAR(none.value, 0.0, 1e-6);
}

TEST(AssureEstimate, HandLoopAndStandardError) {
    const auto [d, truth] = draw(101, 3);
    const auto fam = DecisionFamily::tstat();
    const std::vector<double> beta{0.4};
    const double h = auto_bandwidth(d.size()).h;
    const auto e = assure_estimate(d, fam, beta);
    double mean = 0.0;
    std::vector<double> w;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Context z = context_of(d, i);
        w.push_back(assure_summand(d.y()[i], z, fam.threshold(z, beta), h));
        mean += w.back();
    }
    mean /= 101.0;
    double ss = 0.0;
    for (double v : w)
        ss += (v - mean) * (v - mean);
    EXPECT_NEAR(e.value, mean, 1e-14);
    EXPECT_NEAR(e.std_error, std::sqrt(ss) / 101.0, 1e-14);
    EXPECT_EQ(e.n, 101u);
    EXPECT_EQ(e.h, h);
}

TEST(AssureEstimate, TranslationAndScaleEquivariance) {
    const auto base = draw(64, 5);
    const auto shifted = draw(64, 5, 1.0, 2.5);
    const auto scaled = draw(64, 5, 3.0, 0.0);
    const auto fam = DecisionFamily::threshold();
    const std::vector<double> b{0.3}, b3{0.9};
    const double h = 0.4;
    const double e0 = assure_estimate(base.data, fam, b, h).value;
    EXPECT_NEAR(assure_estimate(shifted.data, fam, b, h).value, e0, 1e-12);
    EXPECT_NEAR(assure_estimate(scaled.data, fam, b3, h).value, 3.0 * e0, 1e-12);
    EXPECT_NEAR(cb_estimate(shifted.data, fam, b, 0.3).value, cb_estimate(base.data, fam, b, 0.3).value, 1e-12);
    EXPECT_NEAR(cb_estimate(scaled.data, fam, b3, 0.3).value, 3.0 * cb_estimate(base.data, fam, b, 0.3).value,
                1e-12);
    const double w0 = oracle_welfare(base.data, base.truth, fam, b);
    EXPECT_NEAR(oracle_welfare(shifted.data, shifted.truth, fam, b), w0, 1e-12);
    EXPECT_NEAR(oracle_welfare(scaled.data, scaled.truth, fam, b3), 3.0 * w0, 1e-12);
    const double u0 = realized_utility(base.data, base.truth, fam, b);
    EXPECT_NEAR(realized_utility(shifted.data, shifted.truth, fam, b), u0, 1e-12);
    EXPECT_NEAR(realized_utility(scaled.data, scaled.truth, fam, b3), 3.0 * u0, 1e-12);
}

TEST(AssureEstimate, Errors) {
    const Dataset pois({0, 1, 2}, {1, 1, 1}, {0, 0, 0}, {}, 0, Likelihood::poisson);
    const auto fam = DecisionFamily::threshold();
    const std::vector<double> b{0.0};
    EXPECT_EQ(error_code([&] { assure_estimate(pois, fam, b); }), "mode_mismatch");
    const Dataset g({0, 1, 2}, {1, 1, 1}, {0, 0, 0}, {}, 0);
    EXPECT_EQ(error_code([&] { poisson_assure(g, fam, b); }), "mode_mismatch");
    EXPECT_THROW(assure_estimate(g, fam, b, -0.1), PreconditionError);
    EXPECT_EQ(error_code([&] { assure_from_thresholds(g, std::vector<double>{0.0}); }), "length_mismatch");
    EXPECT_EQ(error_code([] { method_from_string("npmle"); }), "unknown_method");
}

TEST(AssureEstimate, ReportedStandardErrorTracksMonteCarloSpread) {
    const std::size_t n = 400, reps = 300;
    std::vector<double> mu(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream r(9, StreamTag::mu, 0, static_cast<std::uint32_t>(i));
        mu[i] = r.normal();
        s[i] = 1.0;
    }
    const auto fam = DecisionFamily::threshold();
    const std::vector<double> b{0.2};
    double sum = 0.0, sum2 = 0.0, se = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            RandomStream r(9, StreamTag::outcome, static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(i));
            y[i] = mu[i] + r.normal();
        }
        const auto e = assure_estimate(Dataset(y, s, std::vector<double>(n, 0.0), {}, 0), fam, b);
        sum += e.value;
        sum2 += e.value * e.value;
        se += e.std_error;
    }
    const double mean = sum / reps;
    const double sd = std::sqrt(sum2 / reps - mean * mean);
    // Pooled-mean variance over-covers under heterogeneous mu; it must not under-cover.
    EXPECT_GE(se / reps, 0.9 * sd);
    EXPECT_LE(se / reps, 2.0 * sd);
}

TEST(Moments, PairwiseMatchesTwoPass) {
    std::vector<double> w;
    RandomStream r(1, StreamTag::misc, 0, 0);
    for (int i = 0; i < 1037; ++i)
        w.push_back(1e6 + r.normal());
    const auto m = pairwise_moments(w);
    double mean = 0.0;
    for (double v : w)
        mean += v;
    mean /= static_cast<double>(w.size());
    double ss = 0.0;
    for (double v : w)
        ss += (v - mean) * (v - mean);
    EXPECT_EQ(m.count, w.size());
    EXPECT_NEAR(m.mean, mean, 1e-9);
    EXPECT_NEAR(m.m2 / ss, 1.0, 1e-9);
}

TEST(Derivative, ThresholdGradientIsMeanSlope) {
    const auto [d, truth] = draw(50, 7);
    const auto fam = DecisionFamily::threshold();
    const std::vector<double> b{0.35};
    const double h = auto_bandwidth(50).h;
    double g = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Context z = context_of(d, i);
        g += assure_summand_slopes(d.y()[i], z, fam.threshold(z, b), h).d1;
    }
    EXPECT_NEAR(assure_derivative(d, fam, b, 1).gradient[0], g / 50.0, 1e-14);
}

TEST(Derivative, MatchesFiniteDifferencesAcrossFamilies) {
    const auto [d0, truth] = draw(80, 13);
    std::vector<double> x;
    for (std::size_t i = 0; i < d0.size(); ++i) {
        x.push_back(1.0);
        x.push_back(truth.mu[i] + 0.5 * std::sin(static_cast<double>(i)));
    }
    const Dataset d(std::vector<double>(d0.y().begin(), d0.y().end()),
                    std::vector<double>(d0.sigma().begin(), d0.sigma().end()),
                    std::vector<double>(d0.cost().begin(), d0.cost().end()), x, 2);
    EnsembleComponents c;
    for (std::size_t i = 0; i < d.size(); ++i) {
        c.prior_mean.push_back(0.1 * static_cast<double>(i % 7));
        c.prior_variance.push_back(0.5 + 0.01 * static_cast<double>(i));
        c.model.push_back(x[2 * i + 1]);
    }
    const std::vector<std::pair<DecisionFamily, ParamPoint>> cases = {
        {DecisionFamily::threshold(), {0.3}},
        {DecisionFamily::tstat(), {-0.6}},
        {DecisionFamily::linear_shrink(), {0.4, 0.8}},
        {DecisionFamily::fay_herriot(2), {0.6, 0.1, 0.8}},
        {DecisionFamily::close_gauss(), {0.1, 0.2, -0.5, 0.7}},
        {DecisionFamily::ensemble(c), {0.6}}};
    for (const auto& [fam, beta] : cases) {
        const auto der = assure_derivative(d, fam, beta, 2);
        const std::size_t m = fam.dim();
        for (std::size_t a = 0; a < m; ++a) {
            const double step = 1e-4 * (1.0 + std::abs(beta[a]));
            auto up = beta, dn = beta;
            up[a] += step;
            dn[a] -= step;
            const double fd = (assure_estimate(d, fam, up).value - assure_estimate(d, fam, dn).value) / (2 * step);
            EXPECT_NEAR(der.gradient[a], fd, 1e-5 * std::max(1.0, std::abs(fd))) << to_string(fam.kind());
            const auto gu = assure_derivative(d, fam, up, 1).gradient, gd = assure_derivative(d, fam, dn, 1).gradient;
            for (std::size_t b = 0; b < m; ++b) {
                const double fd2 = (gu[b] - gd[b]) / (2 * step);
                EXPECT_NEAR(der.hessian[a * m + b], fd2, 1e-5 * std::max(1.0, std::abs(fd2))) << to_string(fam.kind());
                EXPECT_NEAR(der.hessian[a * m + b], der.hessian[b * m + a], 1e-8);
            }
        }
    }
    auto t = std::make_shared<const DecisionFamily>(DecisionFamily::threshold());
    EXPECT_THROW(assure_derivative(d, DecisionFamily::finite({{t, {0.0}}}), std::vector<double>{0.0}, 1),
                 UnsupportedError);
}

TEST(CoupledBootstrap, ReferenceValues) {
    for (double y : {-1.0, 0.0, 3.0})
        EXPECT_NEAR(cb_summand(y, Context{1.0, 0.0}, y, 0.5), y / 2 - 0.79788456080286535588, 1e-15);
    EXPECT_NEAR(cb_summand(0.1, Context{0.7, 0.4}, -0.2, 0.5), -0.6281083690021682261, 1e-15);
    EXPECT_NEAR(expected_cb_summand(1.0, Context{0.7, 0.4}, 0.3, 0.5), 0.48867198914319072786, 1e-15);
    EXPECT_NEAR(default_cb_eps(32), 0.5, 1e-15);
    EXPECT_THROW(cb_summand(0.0, Context{}, 0.0, 0.0), PreconditionError);
}

TEST(CoupledBootstrap, ClosedFormMatchesQuadrature) {
    for (double mu : {-1.5, 0.0, 0.8, 2.5})
        for (double eps : {0.2, 0.5, 1.0}) {
            const Context z{1.3, 0.2};
            auto f = [&](double y) {
                return cb_summand(y, z, 0.4, eps) * specfun::normal_pdf((y - mu) / z.sigma) / z.sigma;
            };
            double gk = 0.0;
            for (double a = mu - 12.0 * z.sigma; a < mu + 12.0 * z.sigma - 1e-9; a += z.sigma)
                gk += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, a + z.sigma, 10, 1e-14);
            EXPECT_NEAR(expected_cb_summand(mu, z, 0.4, eps), gk, 1e-12) << mu << ' ' << eps;
        }
}

TEST(CoupledBootstrap, MonteCarloCouplingMatchesSummand) {
    // Y1 = Y + eps sigma W, Y2 = Y - sigma W / eps; E[(Y2 - k) 1{Y1 > delta} | Y] = cb_summand.
    const double y = 0.6, sigma = 1.3, k = 0.2, delta = 0.1, eps = 0.4;
    const std::size_t draws = 400000;
    RandomStream r(21, StreamTag::coupling, 0, 0);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t j = 0; j < draws; ++j) {
        const double w = r.normal();
        const double v = (y - sigma * w / eps - k) * ((y + eps * sigma * w) > delta ? 1.0 : 0.0);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
    EXPECT_NEAR(mean, cb_summand(y, Context{sigma, k}, delta, eps), 3.0 * se);
}

TEST(CoupledBootstrap, BiasScalesQuadratically) {
    const Context z{1.0, 0.0};
    const double truth = 1.0 * specfun::normal_cdf(0.7);
    const double b1 = expected_cb_summand(1.0, z, 0.3, 0.5) - truth;
    const double b2 = expected_cb_summand(1.0, z, 0.3, 0.25) - truth;
    EXPECT_GE(b1 / b2, 2.5);
    EXPECT_LE(b1 / b2, 5.5);
}

TEST(Poisson, SummandArithmetic) {
    EXPECT_EQ(poisson_summand(3.0, 1.0, 2), 2.0);
    EXPECT_EQ(poisson_summand(2.0, 1.0, 2), -1.0);
    EXPECT_EQ(poisson_summand(1.0, 1.0, 2), 0.0);
    const Dataset d({0, 3, 7, 1}, {1, 1, 1, 1}, {0.5, 1, 2, 0}, {}, 0, Likelihood::poisson);
    const auto fam = DecisionFamily::threshold();
    const auto e = poisson_assure(d, fam, std::vector<double>{-10.0});
    EXPECT_NEAR(e.value, ((0 - 0.5) + (3 - 1) + (7 - 2) + (1 - 0)) / 4.0, 1e-15);
}

TEST(Poisson, TailMatchesReference) {
    EXPECT_NEAR(poisson_tail(5.0, 3), 0.87534798051691885871, 1e-15);
    EXPECT_NEAR(poisson_tail(1.5, 2), 0.44217459962892542767, 1e-15);
    EXPECT_EQ(poisson_tail(2.0, 0), 1.0);
    EXPECT_EQ(poisson_tail(0.0, 1), 0.0);
    for (double mu : {0.3, 4.0, 40.0, 400.0})
        for (std::int64_t c : {1, 3, 10, 40, 420}) {
            const boost::math::poisson_distribution<double> P(mu);
            const double ref = boost::math::cdf(boost::math::complement(P, static_cast<double>(c - 1)));
            EXPECT_NEAR(poisson_tail(mu, c), ref, 1e-13 + 1e-12 * ref) << mu << ' ' << c;
        }
}

TEST(Poisson, ExactlyUnbiased) {
    for (double mu : {0.5, 1.5, 5.0})
        for (double k : {0.0, 0.5})
            for (std::int64_t c = 0; c <= 10; ++c) {
                const boost::math::poisson_distribution<double> P(mu);
                double e = 0.0;
                for (int y = 0; y <= 80; ++y)
                    e += boost::math::pdf(P, y) * poisson_summand(y, k, c);
                EXPECT_NEAR(e, (mu - k) * poisson_tail(mu, c), 1e-12) << mu << ' ' << k << ' ' << c;
            }
}

TEST(Oracle, ReferenceValues) {
    const Dataset d({0, 0, 0}, {1, 1, 1}, {0, 0, 0}, {}, 0);
    const auto fam = DecisionFamily::threshold(Interval{-1e3, 1e3});
    const GroundTruth t{{1.0, -1.0, 0.0}};
    // third unit has mu = k and contributes nothing
    EXPECT_NEAR(oracle_welfare(d, t, fam, std::vector<double>{0.0}) * 3.0 / 2.0, 0.34134474606854294859, 1e-15);
    EXPECT_NEAR(oracle_welfare(d, t, fam, std::vector<double>{-1e3}), 0.0, 1e-15);
    const GroundTruth t2{{2.0, 1.0, 0.5}};
    EXPECT_NEAR(oracle_welfare(d, t2, fam, std::vector<double>{-1e3}), 3.5 / 3.0, 1e-15);
    const Dataset zero({0, 5, -2}, {1, 2, 3}, {0.5, 1, 2}, {}, 0);
    for (double b : {-3.0, 0.0, 2.0})
        EXPECT_EQ(oracle_welfare(zero, GroundTruth{{0.5, 1, 2}}, fam, std::vector<double>{b}), 0.0);
}

TEST(Oracle, PoissonWelfare) {
    const Dataset d({0, 2, 5}, {1, 1, 1}, {0.5, 0.5, 1}, {}, 0, Likelihood::poisson);
    const GroundTruth t{{1.5, 5.0, 0.3}};
    const auto fam = DecisionFamily::threshold();
    const double w = oracle_welfare(d, t, fam, std::vector<double>{1.2});
    // cutoffs: ceil(0.5 + 1.2) = 2, 2, ceil(2.2) = 3
    const double ref = (1.0 * 0.44217459962892542767 + 4.5 * poisson_tail(5.0, 2) + (-0.7) * poisson_tail(0.3, 3)) / 3;
    EXPECT_NEAR(w, ref, 1e-15);
}

TEST(RealizedUtility, MatchesLoop) {
    const auto [d, truth] = draw(200, 17);
    const auto fam = DecisionFamily::linear_shrink();
    const std::vector<double> b{0.2, 0.9};
    double u = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (decide(fam, context_of(d, i), b, d.y()[i]))
            u += truth.mu[i] - d.cost()[i];
    EXPECT_NEAR(realized_utility(d, truth, fam, b), u / 200.0, 1e-15);
    const auto wide = DecisionFamily::threshold(Interval{-1e3, 1e3});
    EXPECT_EQ(realized_utility(d, truth, wide, std::vector<double>{1e3}), 0.0);
    double all = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        all += truth.mu[i] - d.cost()[i];
    EXPECT_NEAR(realized_utility(d, truth, wide, std::vector<double>{-1e3}), all / 200.0, 1e-14);
}

TEST(Quadrature, GaussHermiteIsExactForPolynomials) {
    EXPECT_NEAR(gaussian_expectation([](double y) { return y * y; }, 1.5, 2.0), 1.5 * 1.5 + 4.0, 1e-12);
    EXPECT_NEAR(gaussian_expectation([](double y) { return y * y * y * y; }, 0.0, 1.0), 3.0, 1e-12);
    EXPECT_NEAR(gaussian_expectation([](double y) { return std::cos(y); }, 0.0, 1.0), std::exp(-0.5), 1e-14);
}
