#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bfvar/hypotheses.hpp"
#include "bfvar/types.hpp"

namespace bfvar::kgroups {

struct ChainConfig {
    std::size_t chains = 4;
    std::size_t warmup = 1000;
    std::size_t draws = 5000;   // kept draws per chain
    std::size_t thin = 1;
    std::size_t max_bridge_iterations = 1000;
    double ess_threshold = 400.0;
    bool parallel = true;
    std::size_t prior_mc_draws = 1000000;  // only for orders over more than 24 blocks
};

struct PosteriorDraws {
    std::vector<std::vector<double>> draws;          // simplex points, chain-major
    std::vector<std::vector<double>> unconstrained;  // matching stick-breaking coordinates
    std::size_t chains = 0;
    std::size_t per_chain = 0;
    std::uint64_t seed = 0;
    double acceptance_rate = 0.0;
    double ess_min = 0.0;
    bool flagged = false;
};

struct BridgeResult {
    double log_ml = 0.0;
    double se = 0.0;
    std::size_t iterations = 0;
};

struct FractionResult {
    double log_bf_r1 = 0.0;
    double se = 0.0;
    std::size_t posterior_hits = 0;
    std::size_t prior_hits = 0;  // 0 when the prior fraction is exact
};

// Shared convention constant pi^((M-n)/2) Gamma((n-M)/2).
double log_ml_constant(const std::vector<GroupStats>& stats);

// All groups share one precision.
double log_ml_h0_k(const std::vector<GroupStats>& stats);

// ln of likelihood times Dirichlet(alpha) density at rho, convention constant included.
double unnorm_log_post(std::span<const double> rho, const std::vector<GroupStats>& stats, double alpha);

// Stick-breaking map from R^(K-1) to the open simplex; returns ln|Jacobian|.
double to_simplex(std::span<const double> y, std::span<double> rho);
void from_simplex(std::span<const double> rho, std::span<double> y);

PosteriorDraws sample_posterior(const std::vector<GroupStats>& stats, double alpha, const ChainConfig& config,
                                std::uint64_t seed);

BridgeResult bridge_log_ml(const PosteriorDraws& draws, const std::vector<GroupStats>& stats, double alpha,
                           std::size_t max_iterations = 1000);

std::vector<std::vector<double>> sample_prior(std::size_t k, double alpha, std::size_t n_draws, std::uint64_t seed);

// Posterior over prior fraction of draws satisfying the order of spec. Both sets
// must live on the collapsed simplex of spec.
FractionResult encompassing_fraction(const HypothesisSpec& spec, const PosteriorDraws& posterior,
                                     const std::vector<std::vector<double>>& prior_draws);
// Same with the exact prior fraction.
FractionResult encompassing_fraction(const HypothesisSpec& spec, const PosteriorDraws& posterior);

// Initial-monotone-sequence effective sample size of a chain-major series.
double effective_sample_size(std::span<const double> series, std::size_t chains);

struct Evidence {
    std::string hypothesis;
    std::string draw_set;   // identifies the posterior sample used; empty for closed forms
    double log_ml = 0.0;
    double se = 0.0;        // Monte Carlo standard error of log_ml
    double bridge_se = 0.0;
    double fraction_se = 0.0;
    double log_posterior_fraction = 0.0;
    double log_prior_fraction = 0.0;
    Method method = Method::closed_form;
    double ess_min = 0.0;
    double acceptance_rate = 0.0;
    std::vector<std::string> flags;
};

// Log marginal likelihood of each hypothesis; hypotheses sharing a partition share draws.
std::vector<Evidence> evaluate(const std::vector<HypothesisSpec>& specs, const std::vector<GroupStats>& stats,
                               double alpha, const ChainConfig& config, std::uint64_t seed);

BayesFactorResult compare(const Evidence& numerator, const Evidence& denominator);

BayesFactorResult log_bf(const HypothesisSpec& numerator, const HypothesisSpec& denominator,
                         const std::vector<GroupStats>& stats, double alpha, const ChainConfig& config,
                         std::uint64_t seed);

// delta_ij = sigma_j / sigma_i = sqrt(rho_i / rho_j) for i < j, from unconstrained posterior draws.
struct PairwiseDelta {
    std::size_t i, j;
    std::vector<double> values;
    double mean, lower, upper, prob_greater_one;
};

std::vector<PairwiseDelta> pairwise_deltas(const PosteriorDraws& draws);

}  // namespace bfvar::kgroups
