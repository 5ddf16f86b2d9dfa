#pragma once

#include <optional>

#include "bfvar/types.hpp"

namespace bfvar::elicitation {

// "P(delta in interval | delta in truncation) = prob" under a symmetric Beta(alpha, alpha) prior on rho.
struct ElicitationTarget {
    DeltaInterval interval;
    double prob = 0.5;
    std::optional<DeltaInterval> truncation;
};

void validate(const ElicitationTarget& t);

double delta_interval_prob(const DeltaInterval& interval, double alpha,
                           const std::optional<DeltaInterval>& truncation = std::nullopt);

// Root of delta_interval_prob(alpha) = prob for alpha in [1e-4, 1e4].
double solve_alpha(const ElicitationTarget& target);

}  // namespace bfvar::elicitation
