#include <doctest.h>

#include <cmath>
#include <limits>

#include "bfvar/errors.hpp"
#include "bfvar/one_sample.hpp"
#include "bfvar/specfun.hpp"
#include "oracles/oracle_values.hpp"

using namespace bfvar;
using namespace bfvar::one_sample;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("two-sided factors match high-precision quadrature") {
    CHECK(log_bf10_one({12, 5.5, 1.7}, 1.3).log_bf10 == doctest::Approx(oracle::kOneA).epsilon(1e-10));
    CHECK(log_bf10_one({200, 150.0, 1.0}, 0.5).log_bf10 == doctest::Approx(oracle::kOneB).epsilon(1e-10));
    CHECK(log_bf10_one({3, 0.4, 25.0}, 8.0).log_bf10 == doctest::Approx(oracle::kOneC).epsilon(1e-10));
}

TEST_CASE("PCB example") {
    const OneSampleProblem p{7, oracle::kPcbSs, 10.0};
    CHECK(log_bf_directed_one(p, 2.16, PointNull{}, {1.0, kInf}).log_bf10 ==
          doctest::Approx(oracle::kPcbDirected).epsilon(1e-10));
    CHECK(log_bf10_one(p, 2.16).log_bf10 == doctest::Approx(oracle::kPcbTwoSided).epsilon(1e-10));
    const double s = oracle::kPcbSdNm1;
    const OneSampleProblem q{7, 7 * s * s, 10.0};
    CHECK(log_bf_directed_one(q, 2.16, PointNull{}, {1.0, kInf}).log_bf10 ==
          doctest::Approx(oracle::kPcbPaperDirected).epsilon(1e-9));
}

TEST_CASE("single observation gives zero") {
    CHECK(log_bf10_one({1, 0.0, 3.0}, 0.5).log_bf10 == 0.0);
}

TEST_CASE("directed halves average to the two-sided factor") {
    const OneSampleProblem p{15, 9.0, 2.0};
    const double up = log_bf_directed_one(p, 0.7, PointNull{}, {1.0, kInf}).log_bf10;
    const double down = log_bf_directed_one(p, 0.7, PointNull{}, {0.0, 1.0}).log_bf10;
    CHECK(std::log(0.5 * std::exp(up) + 0.5 * std::exp(down)) ==
          doctest::Approx(log_bf10_one(p, 0.7).log_bf10).epsilon(1e-9));
}

TEST_CASE("posterior densities") {
    const OneSampleProblem p{10, 6.0, 1.5};
    auto integ = [](auto f, double lo, double hi) {
        return std::exp(specfun::log_integrate([&](double x) { return x > 0 && std::isfinite(x) ? std::log(f(x)) : -kInf; }, lo, hi));
    };
    CHECK(integ([&](double d) { return posterior_delta_pdf_one(d, p, 0.5); }, 0.0, kInf) ==
          doctest::Approx(1.0).epsilon(1e-8));
    CHECK(integ([&](double x) { return posterior_xi_pdf_one(x, p, 0.5); }, 0.0, kInf) ==
          doctest::Approx(1.0).epsilon(1e-8));
    const double d = 1.3;
    CHECK(posterior_delta_pdf_one(d, p, 0.5) == doctest::Approx(2 * d * posterior_xi_pdf_one(d * d, p, 0.5)));
    const auto s = posterior_delta_summary_one(p, 0.5);
    CHECK(s.lower < s.median);
    CHECK(s.median < s.upper);
    CHECK(integ([&](double x) { return posterior_delta_pdf_one(x, p, 0.5); }, 0.0, s.median) ==
          doctest::Approx(0.5).epsilon(1e-7));
    CHECK(integ([&](double x) { return posterior_delta_pdf_one(x, p, 0.5); }, 1.0, kInf) ==
          doctest::Approx(s.prob_greater_one).epsilon(1e-7));
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(log_bf10_one({5, 0.0, 1.0}, 0.5), DomainError);
    CHECK_THROWS_AS(log_bf10_one({1, 2.0, 1.0}, 0.5), DomainError);
    CHECK_THROWS_AS(log_bf10_one({5, 1.0, 0.0}, 0.5), DomainError);
    CHECK_THROWS_AS(log_bf10_one({5, 1.0, 1.0}, -1.0), DomainError);
}
