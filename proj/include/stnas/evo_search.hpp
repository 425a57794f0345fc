#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stnas/genome.hpp"

namespace stnas::evo {

struct SearchConfig {
    int population_size = 64;
    int generations = 50;
    int tournament_size = 4;
    double mutation_prob = 0.2;     // per gene
    double crossover_prob = 0.5;    // per child
    int max_rejection_resamples = 200;
    std::uint64_t seed = 0;

    bool valid() const {
        return population_size >= 1 && generations >= 1 && tournament_size >= 1 &&
               tournament_size <= population_size && max_rejection_resamples >= 1;
    }
};

struct Candidate {
    ArchGenome genome;
    std::uint64_t score = 0;    // snn_total FLOPs
    std::uint64_t params = 0;   // total parameter count
};

/// score desc, then params asc, then lexicographic genome.
bool better(const Candidate& a, const Candidate& b);

struct SearchResult {
    Candidate best;
    std::vector<std::uint64_t> history;          // per-generation best score, non-decreasing
    std::vector<std::uint64_t> history_params;   // params of the best-so-far candidate
    std::uint64_t evaluated_count = 0;
};

/// Thrown when rejection sampling cannot find a genome inside the band.
struct InfeasibleBand : std::runtime_error {
    InfeasibleBand(const SearchSpaceTier& tier)
        : std::runtime_error("no genome found in parameter band [" +
                             std::to_string(tier.min_params) + ", " +
                             std::to_string(tier.max_params) + "] of tier " + tier.name) {}
};

/// Rejection-samples population_size in-band candidates.
std::vector<Candidate> init_population(const SearchSpaceTier& tier, const RunConfig& cfg,
                                       const SearchConfig& scfg);

/// Tournament selection, crossover, mutation, in-band rejection, elitism.
/// Deterministic for a given (tier, cfg, scfg); per-child sub-seeds are
/// derived from the master seed so evaluation order never matters.
SearchResult run_search(const SearchSpaceTier& tier, const RunConfig& cfg,
                        const SearchConfig& scfg);

/// Enumerates the full grid (refused above 10^6 points), filters by the
/// band, returns the best candidate. Throws InfeasibleBand when the
/// feasible set is empty.
Candidate exhaustive_search(const SearchSpaceTier& tier, const RunConfig& cfg);

}  // namespace stnas::evo
