#pragma once

#include "bfvar/types.hpp"

namespace bfvar::two_sample {

// Marginal likelihoods share the convention constant pi^((M-n)/2) Gamma((n-M)/2),
// with n the total size and M the total member count; only differences are meaningful.
double log_ml_h0(const GroupStats& g1, const GroupStats& g2);
double log_ml_h1(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior);

// ln BF10 = log_ml_h1 - log_ml_h0; exactly 0 for sizes (1,1), (1,2), (2,1).
BayesFactorResult log_bf10(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior);

// ln[f(d | rho) pi(rho)] in the same convention, so it integrates to exp(log_ml_h1).
double log_integrand_rho(double rho, const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior);

// Posterior densities. rho = tau1 / (tau1 + tau2), delta = sigma2 / sigma1.
double posterior_rho_pdf(double rho, const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior);
double posterior_delta_pdf(double delta, const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior);
double prior_delta_pdf(double delta, const PriorSpec& prior);

// Joint posterior of rho and the mean precision tau.
double joint_posterior_pdf(double rho, double tau, const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior);

// Prior probability of delta falling in the interval.
double log_prior_interval_mass(const DeltaInterval& iv, const PriorSpec& prior);

// Marginal likelihood under the prior truncated to the interval.
double log_ml_interval(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior, const DeltaInterval& iv);

// ln BF of {delta in alt} against the null (point delta = 1 or an interval).
BayesFactorResult log_bf_directed(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior,
                                  const DeltaRestriction& null, const DeltaInterval& alt);

struct DeltaSummary {
    double mean;          // NaN when the posterior mean is infinite
    double median;
    double lower;         // 2.5% quantile
    double upper;         // 97.5% quantile
    double prob_greater_one;
};

DeltaSummary posterior_delta_summary(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior);

// Jeffreys' approximate BF01 for the agreement of two standard errors.
double jeffreys_bf01_1939(const GroupStats& g1, const GroupStats& g2);

}  // namespace bfvar::two_sample
