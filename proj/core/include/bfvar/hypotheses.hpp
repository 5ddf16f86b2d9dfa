#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bfvar/types.hpp"

namespace bfvar {

// Partition of groups 0..k-1 into equality blocks plus a strict partial order
// between blocks. Blocks are sorted by their smallest member, members ascending;
// order holds (greater block, lesser block) index pairs, sorted and unique.
struct HypothesisSpec {
    std::size_t k = 0;
    std::vector<std::vector<std::size_t>> blocks;
    std::vector<std::pair<std::size_t, std::size_t>> order;

    bool operator==(const HypothesisSpec&) const = default;
};

// Grammar (whitespace ignored, indices 1-based):
//   expr := term (('<' | '>') term)*
//   term := item (',' item)*
//   item := atom | '(' term ')'
//   atom := index ('=' index)*
HypothesisSpec parse_hypothesis(std::string_view text, std::size_t k);

// Canonical text form; parse_hypothesis(to_string(s), s.k) == s.
std::string to_string(const HypothesisSpec& spec);

// Throws DomainError if the spec is malformed or its order is cyclic.
void validate(const HypothesisSpec& spec);

// Spec with k singleton blocks and no order.
HypothesisSpec unconstrained_spec(std::size_t k);
// Spec with one block holding all k groups.
HypothesisSpec null_spec(std::size_t k);

bool satisfies_order(std::span<const double> rho, const HypothesisSpec& spec);

struct Collapsed {
    std::vector<GroupStats> stats;
    HypothesisSpec spec;
};

// Pools each equality block into one GroupStats and returns the induced spec over blocks.
Collapsed collapse(const std::vector<GroupStats>& stats, const HypothesisSpec& spec);

// Exact prior probability of the block order under an exchangeable prior on the
// block weights: (number of linear extensions) / m!. Requires at most 24 blocks.
double log_prior_order_fraction(const HypothesisSpec& spec);

// Text key identifying the partition only, e.g. "1=2|3".
std::string partition_key(const HypothesisSpec& spec);

}  // namespace bfvar
