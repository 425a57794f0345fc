#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "stnas/cost_model.hpp"
#include "stnas/evo_search.hpp"

using namespace stnas;
using namespace stnas::evo;

namespace {

constexpr std::uint64_t kNoBandMax = std::numeric_limits<std::uint64_t>::max();

SearchSpaceTier micro_tier() {
    return {"micro", {64, 128, 64}, {3, 4, 1}, {4, 4, 4}, {1, 2, 1}, 0, kNoBandMax};
}

}  // namespace

TEST_CASE("exhaustive search finds the micro-tier maximum") {
    RunConfig cfg;
    Candidate best = exhaustive_search(micro_tier(), cfg);
    CHECK(best.genome == ArchGenome{128, 4, 4, 2});
    CHECK(best.score == cost::flops_snn(best.genome, cfg).snn_total);

    // Brute-force confirmation that nothing scores higher.
    for (int e : {64, 128})
        for (int r : {3, 4})
            for (int d : {1, 2})
                CHECK(cost::flops_snn({e, r, 4, d}, cfg).snn_total <= best.score);
}

TEST_CASE("exhaustive search on a one-point tier") {
    SearchSpaceTier t{"one", {192, 192, 1}, {4, 4, 1}, {4, 4, 4}, {2, 2, 1}, 0, kNoBandMax};
    RunConfig cfg;
    CHECK(exhaustive_search(t, cfg).genome == ArchGenome{192, 4, 4, 2});
}

TEST_CASE("exhaustive search rejects an infeasible band and huge grids") {
    RunConfig cfg;
    SearchSpaceTier t = micro_tier();
    t.min_params = 1'000'000'000'000ULL;
    t.max_params = t.min_params + 1;
    CHECK_THROWS_AS(exhaustive_search(t, cfg), InfeasibleBand);

    SearchSpaceTier huge = micro_tier();
    huge.depth_range = {1, 10'000'000, 1};
    CHECK_THROWS_AS(exhaustive_search(huge, cfg), std::invalid_argument);
}

TEST_CASE("init_population respects the band") {
    RunConfig cfg;
    SearchConfig scfg;
    scfg.seed = 7;
    auto pop = init_population(tiny_tier(), cfg, scfg);
    CHECK(int(pop.size()) == scfg.population_size);
    for (const auto& c : pop) {
        CHECK(c.params >= 4'000'000);
        CHECK(c.params <= 5'000'000);
        CHECK(c.score == cost::flops_snn(c.genome, cfg).snn_total);
        CHECK(c.params == cost::param_count(c.genome, cfg).total);
    }
}

TEST_CASE("init_population raises on an infeasible band") {
    RunConfig cfg;
    SearchConfig scfg;
    SearchSpaceTier t = tiny_tier();
    t.min_params = 1'000'000'000'000ULL;
    t.max_params = t.min_params + 1;
    CHECK_THROWS_AS(init_population(t, cfg, scfg), InfeasibleBand);
}

TEST_CASE("search equals exhaustive optimum on the micro tier") {
    RunConfig cfg;
    SearchConfig scfg;
    scfg.seed = 5;
    SearchResult r = run_search(micro_tier(), cfg, scfg);
    CHECK(r.best.genome == ArchGenome{128, 4, 4, 2});
}

TEST_CASE("degenerate search returns the single initial candidate") {
    RunConfig cfg;
    SearchConfig scfg;
    scfg.population_size = 1;
    scfg.generations = 1;
    scfg.tournament_size = 1;
    scfg.seed = 13;
    SearchResult r = run_search(tiny_tier(), cfg, scfg);
    auto pop = init_population(tiny_tier(), cfg, scfg);
    CHECK(r.best.genome == pop[0].genome);
    CHECK(r.history.size() == 1);
}

TEST_CASE("history is non-decreasing and best stays in band") {
    RunConfig cfg;
    SearchConfig scfg;
    scfg.generations = 20;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        scfg.seed = seed;
        SearchResult r = run_search(tiny_tier(), cfg, scfg);
        for (size_t i = 1; i < r.history.size(); ++i)
            CHECK(r.history[i] >= r.history[i - 1]);
        CHECK(r.best.params >= 4'000'000);
        CHECK(r.best.params <= 5'000'000);
        CHECK(r.history.back() == r.best.score);
    }
}

TEST_CASE("search is deterministic in its seed") {
    RunConfig cfg;
    SearchConfig scfg;
    scfg.generations = 10;
    scfg.seed = 99;
    SearchResult a = run_search(small_tier(), cfg, scfg);
    SearchResult b = run_search(small_tier(), cfg, scfg);
    CHECK(a.best.genome == b.best.genome);
    CHECK(a.history == b.history);
    CHECK(a.evaluated_count == b.evaluated_count);
}

TEST_CASE("search beats a 1000-sample random baseline on the tiny tier") {
    RunConfig cfg;
    SearchConfig scfg;
    scfg.seed = 42;
    SearchResult r = run_search(tiny_tier(), cfg, scfg);

    Rng rng(4242);
    std::uint64_t best_random = 0;
    int accepted = 0;
    while (accepted < 1000) {
        ArchGenome g = sample(tiny_tier(), rng);
        if (!cost::in_band(g, tiny_tier(), cfg)) continue;
        ++accepted;
        best_random = std::max(best_random, cost::flops_snn(g, cfg).snn_total);
    }
    CHECK(r.best.score >= best_random);
}

TEST_CASE("candidate ordering breaks ties by params then genome") {
    Candidate a{{192, 3, 4, 1}, 100, 10};
    Candidate b{{192, 3, 4, 1}, 100, 20};
    CHECK(better(a, b));
    Candidate c{{192, 3, 4, 2}, 100, 10};
    CHECK(better(a, c));
    Candidate d{{192, 3, 4, 1}, 200, 999};
    CHECK(better(d, a));
}
