#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "stnas/genome.hpp"

namespace stnas::stats {

struct ScoredSample {
    ArchGenome genome;
    double score = 0.0;
    double accuracy = 0.0;   // percent, [0, 100]
};

struct CorrelationReport {
    double kendall = 0.0;
    double spearman = 0.0;
    std::size_t n = 0;
};

using Pairs = std::vector<std::pair<double, double>>;

/// Kendall tau-b: (C - D) / sqrt((n0 - Tx)(n0 - Ty)) with tie-pair
/// corrections; reduces to tau-a when no ties. Throws std::invalid_argument
/// for n < 2 or when either variable is fully tied.
double kendall_tau(const Pairs& pairs);

/// Spearman rho: Pearson correlation of average ranks (ties get the mean
/// rank of their group). Throws on degenerate rank variance.
double spearman_rho(const Pairs& pairs);

CorrelationReport correlate(const std::vector<ScoredSample>& samples);

}  // namespace stnas::stats
