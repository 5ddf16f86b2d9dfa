#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "bfvar/elicitation.hpp"
#include "bfvar/hypotheses.hpp"
#include "bfvar/kgroups.hpp"
#include "bfvar/one_sample.hpp"
#include "bfvar/rng.hpp"
#include "bfvar/specfun.hpp"
#include "bfvar/two_sample.hpp"
#include "bfvar/verify.hpp"

using namespace bfvar;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Gen {
    std::mt19937_64 eng;
    explicit Gen(std::uint64_t s) : eng(s) {}
    double unif(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng); }
    double log_unif(double a, double b) { return std::exp(unif(std::log(a), std::log(b))); }
    std::size_t size(std::size_t a, std::size_t b) { return std::uniform_int_distribution<std::size_t>(a, b)(eng); }
    GroupStats group() {
        const std::size_t n = size(2, 400);
        return {n, log_unif(0.01, 100.0) * static_cast<double>(n - 1)};
    }
};

// Random hypothesis text over k groups: shuffled groups cut into blocks, then into ordered layers.
std::string random_hypothesis(Gen& g, std::size_t k) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 1);
    std::shuffle(idx.begin(), idx.end(), g.eng);
    std::vector<std::string> blocks;
    for (std::size_t i = 0; i < k;) {
        const std::size_t len = g.size(1, std::min<std::size_t>(3, k - i));
        std::string b;
        for (std::size_t j = 0; j < len; ++j) b += (j ? "=" : "") + std::to_string(idx[i + j]);
        blocks.push_back(b);
        i += len;
    }
    std::string out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) {
            const auto r = g.size(0, 2);
            out += r == 0 ? "," : r == 1 ? "<" : ">";
        }
        out += blocks[i];
    }
    return out;
}

}  // namespace

TEST_CASE("two-sample label invariance") {
    Gen g(1);
    for (int i = 0; i < 200; ++i) {
        const auto a = g.group(), b = g.group();
        const PriorSpec p{g.log_unif(0.1, 10), g.log_unif(0.1, 10)};
        const PriorSpec q{p.alpha2, p.alpha1};
        CHECK(two_sample::log_bf10(a, b, p).log_bf10 ==
              doctest::Approx(two_sample::log_bf10(b, a, q).log_bf10).epsilon(1e-10));
        const double d = g.log_unif(0.2, 5);
        CHECK(two_sample::posterior_delta_pdf(d, a, b, p) ==
              doctest::Approx(two_sample::posterior_delta_pdf(1 / d, b, a, q) / (d * d)).epsilon(1e-9));
    }
}

TEST_CASE("two-sample measurement invariance") {
    Gen g(2);
    for (int i = 0; i < 200; ++i) {
        const auto a = g.group(), b = g.group();
        const PriorSpec p = PriorSpec::symmetric(g.log_unif(0.1, 10));
        const double c2 = g.log_unif(1e-6, 1e6);
        const double base = two_sample::log_bf10(a, b, p).log_bf10;
        const double scaled = two_sample::log_bf10({a.n, a.ss * c2}, {b.n, b.ss * c2}, p).log_bf10;
        CHECK(std::abs(base - scaled) <= 1e-9 * std::max(1.0, std::abs(base)));
    }
}

TEST_CASE("one-sample measurement invariance") {
    Gen g(3);
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = g.size(2, 300);
        const one_sample::OneSampleProblem p{n, g.log_unif(0.05, 20) * static_cast<double>(n), g.log_unif(0.1, 10)};
        const double c2 = g.log_unif(1e-4, 1e4);
        const double alpha = g.log_unif(0.2, 5);
        const double base = one_sample::log_bf10_one(p, alpha).log_bf10;
        const double scaled = one_sample::log_bf10_one({p.n, p.ss * c2, p.tau0 / c2}, alpha).log_bf10;
        CHECK(std::abs(base - scaled) <= 1e-9 * std::max(1.0, std::abs(base)));
    }
}

TEST_CASE("closed form agrees with the independent quadrature oracle") {
    Gen g(4);
    for (int i = 0; i < 100; ++i) {
        const auto a = g.group(), b = g.group();
        const PriorSpec p{g.log_unif(0.1, 10), g.log_unif(0.1, 10)};
        const double want = verify::quad_ml_two(a, b, p);
        CHECK(std::abs(two_sample::log_ml_h1(a, b, p) - want) <= 1e-8);
    }
}

TEST_CASE("directed halves recombine to the two-sided factor") {
    Gen g(5);
    for (int i = 0; i < 50; ++i) {
        const auto a = g.group(), b = g.group();
        const PriorSpec p = PriorSpec::symmetric(g.log_unif(0.2, 5));
        const double cut = g.log_unif(0.3, 3);
        const double m = two_sample::log_prior_interval_mass({0, cut}, p);
        const double lo = two_sample::log_bf_directed(a, b, p, PointNull{}, {0, cut}).log_bf10;
        const double hi = two_sample::log_bf_directed(a, b, p, PointNull{}, {cut, kInf}).log_bf10;
        const double mix = specfun::log_add_exp(m + lo, std::log(-std::expm1(m)) + hi);
        CHECK(mix == doctest::Approx(two_sample::log_bf10(a, b, p).log_bf10).epsilon(1e-8));
    }
}

TEST_CASE("identical null and alternative intervals give BF 1") {
    const DeltaInterval iv{0.8, 1.3};
    CHECK(two_sample::log_bf_directed({9, 3.0}, {11, 7.0}, PriorSpec{0.5, 0.5}, iv, iv).log_bf10 == 0.0);
}

TEST_CASE("information consistency trend") {
    for (double alpha : {0.1, 0.3, 0.5}) {
        double prev = kInf;
        for (int e = 1; e <= 12; ++e) {
            const double bf01 = -two_sample::log_bf10({2, std::pow(10.0, -e)}, {2, 1.0}, PriorSpec::symmetric(alpha)).log_bf10;
            CHECK(bf01 < prev);
            prev = bf01;
        }
    }
}

TEST_CASE("elicitation round trip and reciprocal symmetry") {
    Gen g(6);
    for (int i = 0; i < 50; ++i) {
        const double lo = g.log_unif(0.1, 0.95), hi = g.log_unif(1.05, 10);
        const double alpha = g.log_unif(0.05, 50);
        const double p = elicitation::delta_interval_prob({lo, hi}, alpha);
        CHECK(elicitation::delta_interval_prob({1 / hi, 1 / lo}, alpha) == doctest::Approx(p).epsilon(1e-12));
        if (p > 1e-6 && p < 1 - 1e-6) {
            const double solved = elicitation::solve_alpha({{lo, hi}, p, std::nullopt});
            CHECK(solved == doctest::Approx(alpha).epsilon(1e-6));
        }
    }
}

TEST_CASE("hypothesis canonical form round trips") {
    Gen g(7);
    for (int i = 0; i < 300; ++i) {
        const std::size_t k = g.size(1, 9);
        const std::string text = random_hypothesis(g, k);
        INFO(text);
        const auto spec = parse_hypothesis(text, k);
        CHECK(parse_hypothesis(to_string(spec), k) == spec);
        std::string unordered = text;
        std::replace(unordered.begin(), unordered.end(), '<', ',');
        std::replace(unordered.begin(), unordered.end(), '>', ',');
        CHECK(partition_key(spec) == partition_key(parse_hypothesis(unordered, k)));
    }
}

TEST_CASE("exact order fraction matches prior frequency") {
    Gen g(8);
    const std::size_t k = 5;
    const auto prior = kgroups::sample_prior(k, 0.5, 100000, 17);
    int tested = 0;
    for (int i = 0; i < 2000 && tested < 10; ++i) {
        const auto spec = parse_hypothesis(random_hypothesis(g, k), k);
        if (spec.blocks.size() != k) continue;
        ++tested;
        const double exact = std::exp(log_prior_order_fraction(spec));
        double hits = 0.0;
        for (const auto& r : prior) hits += satisfies_order(r, spec);
        const double freq = hits / static_cast<double>(prior.size());
        CHECK(std::abs(freq - exact) < 5 * std::sqrt(exact * (1 - exact) / prior.size()) + 1e-12);
    }
    CHECK(tested == 10);
}

TEST_CASE("stick-breaking round trip") {
    Gen g(9);
    for (int i = 0; i < 200; ++i) {
        const std::size_t k = g.size(2, 12);
        std::vector<double> y(k - 1), rho(k), back(k - 1);
        for (auto& v : y) v = g.unif(-8, 8);
        kgroups::to_simplex(y, rho);
        CHECK(std::accumulate(rho.begin(), rho.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
        kgroups::from_simplex(rho, back);
        for (std::size_t j = 0; j + 1 < k; ++j) CHECK(back[j] == doctest::Approx(y[j]).epsilon(1e-9));
    }
}

TEST_CASE("K-group label invariance") {
    const std::vector<GroupStats> s{{30, 25.0}, {40, 60.0}, {25, 50.0}};
    const std::vector<GroupStats> perm{s[2], s[0], s[1]};  // new 1 = old 3, new 2 = old 1, new 3 = old 2
    kgroups::ChainConfig cfg;
    const auto a = kgroups::log_bf(parse_hypothesis("1>2>3", 3), null_spec(3), s, 0.5, cfg, 1);
    const auto b = kgroups::log_bf(parse_hypothesis("2>3>1", 3), null_spec(3), perm, 0.5, cfg, 2);
    const double se = std::hypot(*a.mc_se, *b.mc_se);
    CHECK(std::abs(a.log_bf10 - b.log_bf10) < 3 * se + 1e-3);
    CHECK(kgroups::log_ml_h0_k(s) == doctest::Approx(kgroups::log_ml_h0_k(perm)).epsilon(1e-14));
}

TEST_CASE("simulation reproducibility per replication") {
    const verify::SimulationScenario a{{1.0, 2.0, 0.5}, {5, 6, 7}, 10, 123};
    auto b = a;
    b.replications = 4;
    const auto x = verify::simulate(a), y = verify::simulate(b);
    for (std::size_t r = 0; r < 4; ++r) CHECK(x[r] == y[r]);
}
