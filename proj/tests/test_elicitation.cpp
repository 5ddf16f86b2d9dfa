#include <doctest.h>

#include <limits>

#include "bfvar/elicitation.hpp"
#include "bfvar/errors.hpp"
#include "oracles/oracle_values.hpp"

using namespace bfvar;
using namespace bfvar::elicitation;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("symmetric interval target") {
    const ElicitationTarget t{{0.5, 2.0}, 0.95, std::nullopt};
    const double a = solve_alpha(t);
    CHECK(a == doctest::Approx(oracle::kAlphaSymmetric).epsilon(1e-9));
    CHECK(delta_interval_prob({0.5, 2.0}, a) == doctest::Approx(0.95).epsilon(1e-12));
}

TEST_CASE("truncated target") {
    const ElicitationTarget t{{2.0, kInf}, 0.5, DeltaInterval{1.0, kInf}};
    CHECK(solve_alpha(t) == doctest::Approx(oracle::kAlphaTruncated).epsilon(1e-9));
}

TEST_CASE("interval probability is monotone in alpha") {
    double prev = 0.0;
    for (double a : {0.1, 0.5, 1.0, 3.0, 10.0}) {
        const double p = delta_interval_prob({0.8, 1.25}, a);
        CHECK(p > prev);
        prev = p;
    }
    CHECK(delta_interval_prob({0.0, kInf}, 0.7) == doctest::Approx(1.0));
    CHECK(delta_interval_prob({1.0, kInf}, 0.7) == doctest::Approx(0.5));
}

TEST_CASE("invalid targets") {
    CHECK_THROWS_AS(solve_alpha({{0.5, 2.0}, 1.5, std::nullopt}), DomainError);
    CHECK_THROWS_AS(solve_alpha({{2.0, 0.5}, 0.5, std::nullopt}), DomainError);
    CHECK_THROWS_AS(solve_alpha({{1.0, kInf}, 0.7, std::nullopt}), DomainError);
    CHECK_THROWS_AS(solve_alpha({{0.5, 2.0}, 0.5, DeltaInterval{1.0, 3.0}}), DomainError);
}
