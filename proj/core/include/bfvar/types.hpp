#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bfvar {

// Sufficient statistics of one group: size and sum of squared deviations.
// members counts the raw groups pooled into this entry (one free mean each).
struct GroupStats {
    std::size_t n = 1;
    double ss = 0.0;
    std::size_t members = 1;

    std::size_t df() const { return n - members; }
    bool operator==(const GroupStats&) const = default;
};

// How a reported standard deviation was computed.
enum class SdDivisor { n_minus_1, n };

GroupStats stats_from_sd(std::size_t n, double sd, SdDivisor divisor);

// Throws DomainError unless n >= members >= 1, ss finite and >= 0,
// ss == 0 when df == 0, and ss > 0 when df > 0.
void validate(const GroupStats& g);

// Shape parameters of the Beta prior on the precision weight rho.
struct PriorSpec {
    double alpha1 = 0.5;
    double alpha2 = 0.5;

    static PriorSpec symmetric(double alpha) { return {alpha, alpha}; }
    bool symmetric_prior() const { return alpha1 == alpha2; }
    // Information consistency is only guaranteed for alpha <= 1/2.
    bool information_consistent() const { return alpha1 <= 0.5 && alpha2 <= 0.5; }
};

void validate(const PriorSpec& p);

// Closed interval on the sd ratio delta; hi may be +infinity.
struct DeltaInterval {
    double lo = 0.0;
    double hi = 0.0;
};

void validate(const DeltaInterval& d);

struct PointNull {};

using DeltaRestriction = std::variant<PointNull, DeltaInterval>;

enum class Method { closed_form, quadrature, bridge_encompassing };

std::string to_string(Method m);

struct BayesFactorResult {
    double log_bf10 = 0.0;
    Method method = Method::closed_form;
    std::optional<double> mc_se;
    std::vector<std::string> flags;
};

// rho = delta^2 / (1 + delta^2), carried together with 1 - rho and logit(rho)
// so that both tails stay accurate.
struct RhoPoint {
    double rho;
    double one_minus_rho;
    double logit;
};

RhoPoint rho_of_delta(double delta);

}  // namespace bfvar
