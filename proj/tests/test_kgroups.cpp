#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bfvar/errors.hpp"
#include "bfvar/hypotheses.hpp"
#include "bfvar/kgroups.hpp"
#include "bfvar/rng.hpp"
#include "bfvar/two_sample.hpp"
#include "oracles/oracle_values.hpp"

using namespace bfvar;
using namespace bfvar::kgroups;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const std::vector<GroupStats> kSmall{{5, 4.0}, {8, 12.0}, {6, 3.0}};
}  // namespace

TEST_CASE("equal-precision marginal likelihood agrees with the two-sample form") {
    const GroupStats a{7, 3.1}, b{12, 20.4};
    CHECK(log_ml_h0_k({a, b}) == doctest::Approx(two_sample::log_ml_h0(a, b)).epsilon(1e-14));
    CHECK(log_ml_h0_k({a, b}) == doctest::Approx(oracle::kTwoMlH0_0).epsilon(1e-13));
}

TEST_CASE("stick-breaking map") {
    std::vector<double> y{0.3, -1.2, 2.0}, rho(4), back(3);
    const double lj = to_simplex(y, rho);
    double sum = 0.0;
    for (double r : rho) {
        CHECK(r > 0);
        sum += r;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    from_simplex(rho, back);
    for (int i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(y[i]).epsilon(1e-12));

    // log|det J| of the map to the first K-1 coordinates, by central differences
    const double h = 1e-6;
    double J[3][3];
    for (int j = 0; j < 3; ++j) {
        std::vector<double> yp = y, ym = y, rp(4), rm(4);
        yp[j] += h;
        ym[j] -= h;
        to_simplex(yp, rp);
        to_simplex(ym, rm);
        for (int i = 0; i < 3; ++i) J[i][j] = (rp[i] - rm[i]) / (2 * h);
    }
    const double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                       J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                       J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
    CHECK(std::log(std::abs(det)) == doctest::Approx(lj).epsilon(1e-6));
}

TEST_CASE("effective sample size") {
    Engine eng(42);
    const std::size_t n = 20000;
    std::vector<double> iid(n), ar(n);
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        iid[i] = standard_normal(eng);
        x = 0.9 * x + std::sqrt(1 - 0.81) * standard_normal(eng);
        ar[i] = x;
    }
    CHECK(effective_sample_size(iid, 4) == doctest::Approx(n).epsilon(0.1));
    CHECK(effective_sample_size(ar, 4) == doctest::Approx(n * 0.1 / 1.9).epsilon(0.25));
    CHECK_THROWS_AS(effective_sample_size(iid, 3), DomainError);
}

TEST_CASE("sampling is reproducible and independent of threading") {
    ChainConfig cfg;
    cfg.warmup = 500;
    cfg.draws = 1000;
    const auto a = sample_posterior(kSmall, 0.5, cfg, 7);
    const auto b = sample_posterior(kSmall, 0.5, cfg, 7);
    cfg.parallel = false;
    const auto c = sample_posterior(kSmall, 0.5, cfg, 7);
    CHECK(a.draws == b.draws);
    CHECK(a.draws == c.draws);
    const auto d = sample_posterior(kSmall, 0.5, cfg, 8);
    CHECK(a.draws != d.draws);
    CHECK(a.draws.size() == 4000);
    CHECK(a.acceptance_rate > 0.15);
    CHECK(a.acceptance_rate < 0.6);
}

TEST_CASE("bridge sampling matches two-dimensional quadrature") {
    ChainConfig cfg;
    for (double alpha : {0.5, 2.0}) {
        const auto draws = sample_posterior(kSmall, alpha, cfg, 11);
        const auto br = bridge_log_ml(draws, kSmall, alpha);
        const double want = alpha == 0.5 ? oracle::kK3Small : oracle::kK3SmallAlpha2;
        INFO("alpha=" << alpha << " est=" << br.log_ml << " se=" << br.se);
        CHECK(std::abs(br.log_ml - want) < 4 * br.se + 0.01);
        CHECK(br.se < 0.01);
    }
}

TEST_CASE("evaluate reproduces the two-group closed form") {
    const GroupStats a{9, 5.0}, b{14, 30.0};
    ChainConfig cfg;
    const auto bf = log_bf(unconstrained_spec(2), null_spec(2), {a, b}, 0.5, cfg, 3);
    const double exact = two_sample::log_bf10(a, b, PriorSpec{0.5, 0.5}).log_bf10;
    REQUIRE(bf.mc_se.has_value());
    CHECK(std::abs(bf.log_bf10 - exact) < 4 * *bf.mc_se + 0.01);

    // order constraint rho1 > rho2 is delta > 1
    const auto dir = log_bf(parse_hypothesis("1>2", 2), unconstrained_spec(2), {a, b}, 0.5, cfg, 3);
    const double want = two_sample::log_bf_directed(a, b, PriorSpec{0.5, 0.5}, PointNull{}, {1.0, kInf}).log_bf10 -
                        exact;
    CHECK(std::abs(dir.log_bf10 - want) < 4 * *dir.mc_se + 0.01);
}

TEST_CASE("order fractions") {
    ChainConfig cfg;
    const auto draws = sample_posterior(kSmall, 0.5, cfg, 5);
    const auto spec = parse_hypothesis("2<1<3", 3);
    const auto exact = encompassing_fraction(spec, draws);
    CHECK(exact.prior_hits == 0);
    const auto prior = sample_prior(3, 0.5, 200000, 9);
    const auto mc = encompassing_fraction(spec, draws, prior);
    CHECK(mc.prior_hits == doctest::Approx(200000.0 / 6).epsilon(0.02));
    CHECK(std::abs(mc.log_bf_r1 - exact.log_bf_r1) < 4 * mc.se);

    double m0 = 0.0;
    for (const auto& p : prior) m0 += p[0];
    CHECK(m0 / prior.size() == doctest::Approx(1.0 / 3).epsilon(0.01));
}

TEST_CASE("evaluate shares draws within a partition") {
    ChainConfig cfg;
    const std::vector<HypothesisSpec> specs{parse_hypothesis("1,2,3", 3), parse_hypothesis("2<1<3", 3),
                                            parse_hypothesis("1=3,2", 3), parse_hypothesis("1=2=3", 3)};
    const auto ev = evaluate(specs, kSmall, 0.5, cfg, 1);
    REQUIRE(ev.size() == 4);
    CHECK(ev[0].draw_set == ev[1].draw_set);
    CHECK(ev[0].draw_set != ev[2].draw_set);
    CHECK(ev[3].method == Method::closed_form);
    CHECK(ev[3].log_ml == doctest::Approx(log_ml_h0_k(kSmall)));
    CHECK(ev[1].log_prior_fraction == doctest::Approx(-std::log(6.0)));
    // shared draws: comparison only carries the fraction error
    const auto r = compare(ev[1], ev[0]);
    CHECK(r.log_bf10 == doctest::Approx(ev[1].log_posterior_fraction - ev[1].log_prior_fraction));
    const auto again = evaluate(specs, kSmall, 0.5, cfg, 1);
    for (std::size_t i = 0; i < 4; ++i) CHECK(again[i].log_ml == ev[i].log_ml);
}

TEST_CASE("pairwise deltas") {
    ChainConfig cfg;
    const auto draws = sample_posterior(kSmall, 0.5, cfg, 2);
    const auto pd = pairwise_deltas(draws);
    REQUIRE(pd.size() == 3);
    CHECK(pd[0].i == 0);
    CHECK(pd[0].j == 1);
    for (const auto& p : pd) {
        CHECK(p.values.size() == draws.draws.size());
        CHECK(p.lower < p.upper);
        CHECK(p.prob_greater_one >= 0.0);
        CHECK(p.prob_greater_one <= 1.0);
    }
    // group 2 has the largest sd: delta_12 = sigma2 / sigma1 tends above 1
    CHECK(pd[0].prob_greater_one > 0.5);
}

TEST_CASE("input validation") {
    ChainConfig cfg;
    CHECK_THROWS_AS(log_ml_h0_k({{1, 0.0}}), DomainError);
    CHECK_THROWS_AS(sample_posterior(kSmall, -1.0, cfg, 1), DomainError);
    CHECK_THROWS_AS(evaluate({parse_hypothesis("1<2", 2)}, kSmall, 0.5, cfg, 1), DomainError);
    cfg.draws = 2;
    CHECK_THROWS_AS(sample_posterior(kSmall, 0.5, cfg, 1), DomainError);
}
