#include "stnas/evo_search.hpp"

#include "stnas/cost_model.hpp"

namespace stnas::evo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t generation, std::uint64_t slot) {
    return splitmix64(splitmix64(master ^ (generation << 32)) ^ slot);
}

Candidate evaluate(const ArchGenome& g, const RunConfig& cfg) {
    return {g, cost::flops_snn(g, cfg).snn_total, cost::param_count(g, cfg).total};
}

Candidate sample_in_band(const SearchSpaceTier& tier, const RunConfig& cfg,
                         int max_resamples, Rng& rng) {
    for (int i = 0; i < max_resamples; ++i) {
        ArchGenome g = sample(tier, rng);
        if (validate(g, tier) && cost::in_band(g, tier, cfg)) return evaluate(g, cfg);
    }
    throw InfeasibleBand(tier);
}

int tournament_pick(const std::vector<Candidate>& pop, int rounds, Rng& rng) {
    int best = int(rng() % pop.size());
    for (int i = 1; i < rounds; ++i) {
        int c = int(rng() % pop.size());
        if (better(pop[c], pop[best])) best = c;
    }
    return best;
}

}  // namespace

bool better(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.params != b.params) return a.params < b.params;
    return lex_less(a.genome, b.genome);
}

std::vector<Candidate> init_population(const SearchSpaceTier& tier, const RunConfig& cfg,
                                       const SearchConfig& scfg) {
    std::vector<Candidate> pop;
    pop.reserve(scfg.population_size);
    for (int i = 0; i < scfg.population_size; ++i) {
        Rng rng(derive_seed(scfg.seed, 0, std::uint64_t(i)));
        pop.push_back(sample_in_band(tier, cfg, scfg.max_rejection_resamples, rng));
    }
    return pop;
}

SearchResult run_search(const SearchSpaceTier& tier, const RunConfig& cfg,
                        const SearchConfig& scfg) {
    if (!tier.valid()) throw std::invalid_argument("run_search: invalid tier");
    if (!scfg.valid()) throw std::invalid_argument("run_search: invalid search config");

    std::vector<Candidate> pop = init_population(tier, cfg, scfg);
    SearchResult result;
    result.evaluated_count = pop.size();
    result.best = pop[0];
    for (const auto& c : pop)
        if (better(c, result.best)) result.best = c;
    result.history.push_back(result.best.score);
    result.history_params.push_back(result.best.params);

    for (int gen = 1; gen < scfg.generations; ++gen) {
        std::vector<Candidate> next;
        next.reserve(pop.size());
        next.push_back(result.best);   // elitism
        for (int slot = 1; slot < scfg.population_size; ++slot) {
            Rng rng(derive_seed(scfg.seed, std::uint64_t(gen), std::uint64_t(slot)));
            std::uniform_real_distribution<double> coin(0.0, 1.0);
            Candidate child;
            bool admitted = false;
            for (int attempt = 0; attempt < scfg.max_rejection_resamples; ++attempt) {
                const Candidate& pa = pop[tournament_pick(pop, scfg.tournament_size, rng)];
                const Candidate& pb = pop[tournament_pick(pop, scfg.tournament_size, rng)];
                ArchGenome g = (coin(rng) < scfg.crossover_prob)
                                   ? crossover(pa.genome, pb.genome, rng)
                                   : pa.genome;
                g = mutate(g, tier, scfg.mutation_prob, rng);
                ++result.evaluated_count;
                if (validate(g, tier) && cost::in_band(g, tier, cfg)) {
                    child = evaluate(g, cfg);
                    admitted = true;
                    break;
                }
            }
            if (!admitted) throw InfeasibleBand(tier);
            next.push_back(child);
        }
        pop = std::move(next);
        for (const auto& c : pop)
            if (better(c, result.best)) result.best = c;
        result.history.push_back(result.best.score);
        result.history_params.push_back(result.best.params);
    }
    return result;
}

Candidate exhaustive_search(const SearchSpaceTier& tier, const RunConfig& cfg) {
    if (!tier.valid()) throw std::invalid_argument("exhaustive_search: invalid tier");
    if (tier.grid_size() > 1'000'000)
        throw std::invalid_argument("exhaustive_search: grid larger than 10^6 points");

    bool found = false;
    Candidate best;
    for (int e : tier.embed_range.values())
        for (int r : tier.ratio_range.values())
            for (int h : tier.head_range.values())
                for (int d : tier.depth_range.values()) {
                    ArchGenome g{e, r, h, d};
                    if (!validate(g, tier)) continue;
                    if (!cost::in_band(g, tier, cfg)) continue;
                    Candidate c = evaluate(g, cfg);
                    if (!found || better(c, best)) {
                        best = c;
                        found = true;
                    }
                }
    if (!found) throw InfeasibleBand(tier);
    return best;
}

}  // namespace stnas::evo
