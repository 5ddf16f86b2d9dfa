#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bfvar/elicitation.hpp"
#include "bfvar/kgroups.hpp"
#include "bfvar/types.hpp"

namespace bfvar::cli {

enum class Kind { one, two, k, elicit };

// Whether '>' in a hypothesis compares precisions (default) or standard deviations.
enum class OrderOn { precision, sd };

struct AnalysisRequest {
    Kind kind = Kind::two;
    std::vector<GroupStats> stats;
    std::vector<std::string> labels;
    double sigma0 = 1.0;  // one-sample reference sd
    std::vector<std::string> hypotheses;
    double alpha = 0.5;
    std::optional<elicitation::ElicitationTarget> alpha_target;  // alpha elicited instead of given
    std::optional<DeltaInterval> null_interval;
    std::optional<DeltaInterval> alt_interval;
    std::optional<elicitation::ElicitationTarget> elicit;  // kind == elicit
    OrderOn order_on = OrderOn::precision;
    SdDivisor divisor = SdDivisor::n;
    std::uint64_t seed = 1;
    kgroups::ChainConfig chains;
    std::size_t plot_grid = 50;
};

void validate(const AnalysisRequest& r);

struct CsvGroups {
    std::vector<std::string> labels;  // first-appearance order
    std::vector<GroupStats> stats;
};

// Per-group n and ss = sum (x - mean)^2. An empty group_column puts every row in one group.
CsvGroups ingest_csv(const std::string& path, const std::string& group_column, const std::string& value_column);

// The effective alpha: given directly or solved from the elicitation target.
double effective_alpha(const AnalysisRequest& r);

nlohmann::ordered_json run(const AnalysisRequest& r);

// Writes prior/posterior density tables and the alpha sensitivity table; returns the file names.
std::vector<std::string> emit_plot_data(const AnalysisRequest& r, const std::string& dir);

DeltaInterval parse_interval(const std::string& text);

int main_entry(int argc, char** argv);

}  // namespace bfvar::cli
