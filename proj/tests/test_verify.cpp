#include <doctest.h>

#include <cmath>
#include <vector>

#include "bfvar/errors.hpp"
#include "bfvar/verify.hpp"
#include "oracles/oracle_values.hpp"

using namespace bfvar;
using namespace bfvar::verify;

namespace {
void require(const CheckResult& r) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.passed);
}
}  // namespace

TEST_CASE("two-group quadrature oracle matches frozen values") {
    CHECK(quad_ml_two({7, 3.1}, {12, 20.4}, {0.5, 0.5}) == doctest::Approx(oracle::kTwoMlH1_0).epsilon(1e-11));
    CHECK(quad_ml_two({15, 4.0}, {4, 9.0}, {0.7, 3.0}) == doctest::Approx(oracle::kTwoMlH1_2).epsilon(1e-11));
    CHECK(quad_ml_two({40, 35.0}, {60, 90.0}, {4.5, 4.5}) == doctest::Approx(oracle::kTwoMlH1_3).epsilon(1e-11));
}

TEST_CASE("simplex quadrature oracle matches frozen values") {
    const std::vector<GroupStats> s{{5, 4.0}, {8, 12.0}, {6, 3.0}};
    CHECK(quad_ml_k3(s, 0.5) == doctest::Approx(oracle::kK3Small).epsilon(1e-9));
    CHECK(quad_ml_k3(s, 2.0) == doctest::Approx(oracle::kK3SmallAlpha2).epsilon(1e-9));
    // permutation invariance
    const std::vector<GroupStats> p{{6, 3.0}, {5, 4.0}, {8, 12.0}};
    CHECK(std::abs(quad_ml_k3(p, 0.5) - quad_ml_k3(s, 0.5)) < 1e-6);
}

TEST_CASE("simulation") {
    const SimulationScenario sc{{1.0, 4.0}, {10, 1}, 2000, 99};
    const auto a = simulate(sc);
    const auto b = simulate(sc);
    REQUIRE(a.size() == 2000);
    CHECK(a == b);
    double m = 0.0, m2 = 0.0;
    for (const auto& rep : a) {
        CHECK(rep[1].ss == 0.0);
        const double v = rep[0].ss / 9.0;
        m += v;
        m2 += v * v;
    }
    m /= 2000;
    const double se = std::sqrt((m2 / 2000 - m * m) / 2000);
    CHECK(std::abs(m - 1.0) < 3 * se);
    CHECK_THROWS_AS(validate(SimulationScenario{{1.0}, {3, 4}, 1, 0}), DomainError);
}

TEST_CASE("desiderata checks") {
    require(check_predictive_matching());
    require(check_label_invariance());
    require(check_measurement_invariance());
    require(check_information_consistency());
    require(check_limit_consistency());
    require(check_two_to_one_consistency());
    for (const auto& r : check_model_selection(SuiteOptions{})) require(r);
    require(check_jeffreys_relative_agreement());
    require(check_oracle_two(SuiteOptions{}));
}

TEST_CASE("Jeffreys absolute gap shrinks with N (literal)") {
    require(check_jeffreys_agreement());
}

TEST_CASE("suite runs every check") {
    const auto all = desiderata_suite(SuiteOptions{20, 1, 5});
    CHECK(all.size() == 11);
}
