#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bfvar/types.hpp"

namespace bfvar::verify {

// Independent quadrature oracles. Both use the same convention constant as the
// closed forms, so results compare directly with two_sample::log_ml_h1 and bridge estimates.
double quad_ml_two(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior);
double quad_ml_k3(const std::vector<GroupStats>& stats, double alpha);

struct SimulationScenario {
    std::vector<double> taus;
    std::vector<std::size_t> ns;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
};

void validate(const SimulationScenario& s);

// Zero-mean Gaussian samples reduced to GroupStats, one list per replication.
std::vector<std::vector<GroupStats>> simulate(const SimulationScenario& s);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SuiteOptions {
    std::size_t replications = 200;
    std::uint64_t seed = 20240611;
    std::size_t oracle_cases = 100;
};

// Individual desiderata checks; desiderata_suite runs all of them.
CheckResult check_predictive_matching();
CheckResult check_label_invariance();
CheckResult check_measurement_invariance();
CheckResult check_information_consistency();
CheckResult check_limit_consistency();
CheckResult check_two_to_one_consistency();
std::vector<CheckResult> check_model_selection(const SuiteOptions& opt);
// Absolute gap |ln BF10 - ln(1/BF_J01)| shrinking from N=20 to N=1000 for every delta.
CheckResult check_jeffreys_agreement();
// Same gap relative to max(1, |ln BF10|).
CheckResult check_jeffreys_relative_agreement();
CheckResult check_oracle_two(const SuiteOptions& opt);

std::vector<CheckResult> desiderata_suite(const SuiteOptions& opt = {});

}  // namespace bfvar::verify
