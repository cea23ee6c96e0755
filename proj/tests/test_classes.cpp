#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "assure/classes.hpp"
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

Dataset random_dataset(std::size_t n, std::size_t p, std::uint64_t seed) {
    RandomStream r(seed, StreamTag::misc, 0, 0);
    std::vector<double> y, s, k, x;
    for (std::size_t i = 0; i < n; ++i) {
        s.push_back(std::exp(0.5 * r.normal()));
        y.push_back(r.normal() + s.back() * r.normal());
        k.push_back(0.2 * r.uniform());
        for (std::size_t j = 0; j < p; ++j)
            x.push_back(j == 0 ? 1.0 : r.normal());
    }
    return Dataset(y, s, k, x, p);
}

EnsembleComponents random_components(std::size_t n, std::uint64_t seed) {
    RandomStream r(seed, StreamTag::misc, 1, 0);
    EnsembleComponents c;
    for (std::size_t i = 0; i < n; ++i) {
        c.prior_mean.push_back(r.normal());
        c.prior_variance.push_back(0.5 + r.uniform());
        c.model.push_back(r.normal());
    }
    return c;
}

} // namespace

TEST(Threshold, HandEvaluations) {
    const Context z{1.0, 0.0};
    const std::vector<double> half{0.5};
    EXPECT_EQ(DecisionFamily::threshold().threshold(z, half), 0.5);
    EXPECT_EQ(DecisionFamily::tstat().threshold(Context{2.0, 1.0}, half), 2.0);
    const std::vector<double> ls{1.0, 1.0};
    EXPECT_EQ(DecisionFamily::linear_shrink().threshold(z, ls), -1.0);
    const std::vector<double> zeros(4, 0.0);
    EXPECT_EQ(DecisionFamily::close_gauss().threshold(z, zeros), 0.0);
    const std::vector<double> x{1.0, 2.0};
    const std::vector<double> fh{2.0, 0.5, 0.25};
    // k + (sigma^2 / A)(k - x'b) = 0.3 + (4 / 2)(0.3 - 1)
    EXPECT_NEAR(DecisionFamily::fay_herriot(2).threshold(Context{2.0, 0.3, x}, fh), 0.3 + 2.0 * (0.3 - 1.0), 1e-15);
}

TEST(Threshold, LinearShrinkLargeTauApproachesThreshold) {
    const auto ls = DecisionFamily::linear_shrink({default_interval, Interval{1e-4, 1e9, true}});
    const std::vector<double> beta{3.0, 1e8};
    for (double s : {0.1, 1.0, 7.0})
        EXPECT_NEAR(ls.threshold(Context{s, 0.4}, beta), 0.4, 1e-6);
}

TEST(Threshold, CloseGaussReproducesLinearShrink) {
    const auto ls = DecisionFamily::linear_shrink();
    const auto cg = DecisionFamily::close_gauss();
    for (double mu0 : {-2.0, 0.0, 1.5})
        for (double tau : {0.3, 1.0, 4.0})
            for (double s : {0.2, 1.0, 3.0}) {
                const Context z{s, 0.7};
                const std::vector<double> a{mu0, tau};
                const std::vector<double> b{mu0, 0.0, 2.0 * std::log(tau), 0.0};
                EXPECT_NEAR(cg.threshold(z, b), ls.threshold(z, a), 1e-12 * (1.0 + std::abs(ls.threshold(z, a))));
            }
}

TEST(Threshold, EnsembleAtAlphaOneDropsModelTerm) {
    const auto d = random_dataset(20, 0, 1);
    auto c = random_components(20, 2);
    const auto fam = DecisionFamily::ensemble(c);
    const auto cg = DecisionFamily::close_gauss({Interval{-100, 100}, Interval{-100, 100}, Interval{-100, 100},
                                                Interval{-100, 100}});
    const std::vector<double> one{1.0};
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Context z = context_of(d, i);
        // close_gauss with a2 = 0, b2 = 0 and unit-specific m0, s0^2
        const std::vector<double> b{c.prior_mean[i], 0.0, std::log(c.prior_variance[i]), 0.0};
        EXPECT_NEAR(fam.threshold(z, one), cg.threshold(z, b), 1e-12);
    }
    auto shifted = c;
    for (auto& m : shifted.model)
        m += 10.0;
    const auto fam2 = DecisionFamily::ensemble(shifted);
    for (std::size_t i = 0; i < d.size(); ++i)
        EXPECT_EQ(fam.threshold(context_of(d, i), one), fam2.threshold(context_of(d, i), one));
}

TEST(Threshold, FiniteFamilyDelegates) {
    auto t = std::make_shared<const DecisionFamily>(DecisionFamily::threshold());
    auto ts = std::make_shared<const DecisionFamily>(DecisionFamily::tstat());
    const auto f = DecisionFamily::finite({{t, {0.5}}, {ts, {2.0}}});
    EXPECT_EQ(f.dim(), 1u);
    EXPECT_FALSE(f.differentiable());
    const Context z{3.0, 1.0};
    EXPECT_EQ(f.threshold(z, std::vector<double>{0.0}), 1.5);
    EXPECT_EQ(f.threshold(z, std::vector<double>{1.0}), 7.0);
    EXPECT_EQ(error_code([&] { f.threshold(z, std::vector<double>{0.5}); }), "beta_outside_box");
    EXPECT_EQ(error_code([&] { f.threshold(z, std::vector<double>{2.0}); }), "beta_outside_box");
    EXPECT_THROW(f.jet(z, std::vector<double>{0.0}, 1), UnsupportedError);
}

TEST(Threshold, Validation) {
    const auto ls = DecisionFamily::linear_shrink();
    const Context z{1.0, 0.0};
    EXPECT_EQ(error_code([&] { ls.threshold(z, std::vector<double>{1.0}); }), "beta_dimension");
    EXPECT_EQ(error_code([&] { ls.threshold(z, std::vector<double>{11.0, 1.0}); }), "beta_outside_box");
    EXPECT_EQ(error_code([&] { DecisionFamily::threshold(Interval{1.0, 0.0}); }), "invalid_box");
    EXPECT_EQ(error_code([&] { DecisionFamily::linear_shrink({default_interval, Interval{-1.0, 1.0, true}}); }),
              "invalid_box");
    const auto fh = DecisionFamily::fay_herriot(2);
    const std::vector<double> one_cov{1.0};
    EXPECT_EQ(error_code([&] { fh.threshold(Context{1.0, 0.0, one_cov}, std::vector<double>{1.0, 0.0, 0.0}); }),
              "covariate_dimension");
    EXPECT_EQ(error_code([] { family_kind_from_string("npmle"); }), "unknown_family");
    const auto en = DecisionFamily::ensemble(random_components(5, 3));
    EXPECT_EQ(error_code([&] { en.threshold(Context{1.0, 0.0, {}, 9}, std::vector<double>{0.5}); }), "ensemble_index");
}

TEST(Decide, StrictInequalityAndMonotone) {
    const auto t = DecisionFamily::threshold();
    const Context z{1.0, 0.0};
    const std::vector<double> beta{0.25};
    EXPECT_EQ(decide(t, z, beta, 0.3), 1);
    EXPECT_EQ(decide(t, z, beta, 0.25), 0);
    const auto cg = DecisionFamily::close_gauss();
    const std::vector<double> b{0.3, -0.2, 0.5, 1.0};
    int prev = 0;
    for (double y = -10.0; y <= 10.0; y += 0.01) {
        const int d = decide(cg, Context{1.3, 0.2}, b, y);
        EXPECT_GE(d, prev);
        prev = d;
    }
    EXPECT_EQ(prev, 1);
}

TEST(IntegerThreshold, CeilingAndClamp) {
    const auto t = DecisionFamily::threshold();
    const Context z{1.0, 0.0};
    EXPECT_EQ(integer_threshold(t, z, std::vector<double>{2.3}), 3);
    EXPECT_EQ(integer_threshold(t, z, std::vector<double>{-1.0}), 0);
    EXPECT_EQ(integer_threshold(t, z, std::vector<double>{5.0}), 5);
    EXPECT_EQ(integer_cutoff(-INFINITY), 0);
    EXPECT_EQ(integer_cutoff(1e300), std::int64_t{1} << 53);
}

TEST(Thresholds, VectorMatchesPerUnit) {
    const auto d = random_dataset(40, 3, 5);
    const std::vector<std::pair<DecisionFamily, ParamPoint>> cases = {
        {DecisionFamily::threshold(), {0.3}},
        {DecisionFamily::tstat(), {-1.2}},
        {DecisionFamily::linear_shrink(), {0.4, 0.8}},
        {DecisionFamily::fay_herriot(3), {0.6, 0.1, -0.3, 0.2}},
        {DecisionFamily::close_gauss(), {0.1, 0.2, -0.5, 0.7}},
        {DecisionFamily::ensemble(random_components(40, 6)), {0.6}}};
    for (const auto& [fam, beta] : cases) {
        const auto delta = thresholds(d, fam, beta);
        for (std::size_t i = 0; i < d.size(); ++i)
            EXPECT_EQ(delta[i], fam.threshold(context_of(d, i), beta)) << to_string(fam.kind());
    }
    const auto wrong = DecisionFamily::ensemble(random_components(7, 6));
    EXPECT_EQ(error_code([&] { thresholds(d, wrong, std::vector<double>{0.5}); }), "ensemble_index");
}

TEST(Jet, MatchesFiniteDifferences) {
    const auto d = random_dataset(12, 3, 8);
    const std::vector<std::pair<DecisionFamily, ParamPoint>> cases = {
        {DecisionFamily::threshold(), {0.3}},
        {DecisionFamily::tstat(), {-1.2}},
        {DecisionFamily::linear_shrink(), {0.4, 0.8}},
        {DecisionFamily::fay_herriot(3), {0.6, 0.1, -0.3, 0.2}},
        {DecisionFamily::close_gauss(), {0.1, 0.2, -0.5, 0.7}},
        {DecisionFamily::ensemble(random_components(12, 9)), {0.6}}};
    for (const auto& [fam, beta] : cases) {
        const std::size_t m = fam.dim();
        for (std::size_t i = 0; i < d.size(); ++i) {
            const Context z = context_of(d, i);
            const auto jet = fam.jet(z, beta, 2);
            EXPECT_EQ(jet.value, fam.threshold(z, beta));
            for (std::size_t a = 0; a < m; ++a) {
                const double step = 1e-5 * (1.0 + std::abs(beta[a]));
                auto up = beta, dn = beta;
                up[a] += step;
                dn[a] -= step;
                const double fd = (fam.threshold(z, up) - fam.threshold(z, dn)) / (2.0 * step);
                EXPECT_NEAR(jet.gradient[a], fd, 1e-6 * (1.0 + std::abs(fd))) << to_string(fam.kind()) << a;
                const auto gu = fam.jet(z, up, 1).gradient, gd = fam.jet(z, dn, 1).gradient;
                for (std::size_t b = 0; b < m; ++b) {
                    const double fd2 = (gu[b] - gd[b]) / (2.0 * step);
                    EXPECT_NEAR(jet.hessian[a * m + b], fd2, 1e-5 * (1.0 + std::abs(fd2)))
                        << to_string(fam.kind()) << a << b;
                    EXPECT_EQ(jet.hessian[a * m + b], jet.hessian[b * m + a]);
                }
            }
        }
    }
}

TEST(Box, UnitMapsAndCenter) {
    const Interval lin{-2.0, 6.0, false}, lg{1e-2, 1e2, true};
    EXPECT_EQ(lin.from_unit(0.5), 2.0);
    EXPECT_NEAR(lg.from_unit(0.5), 1.0, 1e-15);
    EXPECT_NEAR(lg.to_unit(10.0), 0.75, 1e-15);
    const auto ls = DecisionFamily::linear_shrink({lin, lg});
    const auto c = ls.box_center();
    EXPECT_EQ(c[0], 2.0);
    EXPECT_NEAR(c[1], 1.0, 1e-15);
    const auto cl = ls.clamp({9.0, 1e-5});
    EXPECT_EQ(cl[0], 6.0);
    EXPECT_EQ(cl[1], 1e-2);
}

TEST(FamilyEquivalence, EstimatorsDependOnlyOnThresholds) {
    const auto d = random_dataset(30, 0, 11);
    const auto ls = DecisionFamily::linear_shrink();
    const auto cg = DecisionFamily::close_gauss();
    const std::vector<double> a{0.7, 1.3};
    const std::vector<double> b{0.7, 0.0, 2.0 * std::log(1.3), 0.0};
    const auto ta = thresholds(d, ls, a), tb = thresholds(d, cg, b);
    for (std::size_t i = 0; i < d.size(); ++i)
        ASSERT_NEAR(ta[i], tb[i], 1e-12);
    const auto ea = assure_from_thresholds(d, ta), eb = assure_from_thresholds(d, tb);
    EXPECT_NEAR(ea.value, eb.value, 1e-12);
    EXPECT_NEAR(ea.std_error, eb.std_error, 1e-12);
    const auto same = assure_from_thresholds(d, ta);
    EXPECT_EQ(same.value, assure_estimate(d, ls, a).value);
}
