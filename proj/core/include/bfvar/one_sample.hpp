#pragma once

#include <cstddef>

#include "bfvar/types.hpp"

namespace bfvar::one_sample {

// One group tested against a known precision tau0 = 1 / sigma0^2.
// delta = sigma0 / sigma, so delta^2 = tau / tau0.
struct OneSampleProblem {
    std::size_t n = 1;
    double ss = 0.0;
    double tau0 = 1.0;
};

void validate(const OneSampleProblem& p);

BayesFactorResult log_bf10_one(const OneSampleProblem& p, double alpha);

// ln BF of {delta in alt} against the null (point delta = 1 or an interval).
BayesFactorResult log_bf_directed_one(const OneSampleProblem& p, double alpha, const DeltaRestriction& null,
                                      const DeltaInterval& alt);

double posterior_delta_pdf_one(double delta, const OneSampleProblem& p, double alpha);
// Density of xi = delta^2.
double posterior_xi_pdf_one(double xi, const OneSampleProblem& p, double alpha);

struct DeltaSummary {
    double mean;
    double median;
    double lower;
    double upper;
    double prob_greater_one;
};

DeltaSummary posterior_delta_summary_one(const OneSampleProblem& p, double alpha);

}  // namespace bfvar::one_sample
