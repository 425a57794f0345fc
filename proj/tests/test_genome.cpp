#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "stnas/genome.hpp"

using namespace stnas;

namespace {

SearchSpaceTier one_point_tier() {
    return {"point", {192, 192, 1}, {4, 4, 1}, {4, 4, 4}, {2, 2, 1}, 0,
            std::numeric_limits<std::uint64_t>::max()};
}

}  // namespace

TEST_CASE("built-in tiers match the published grids") {
    const auto tiny = tiny_tier();
    CHECK(tiny.embed_range.low == 192);
    CHECK(tiny.embed_range.high == 384);
    CHECK(tiny.embed_range.step == 64);
    CHECK(tiny.ratio_range.low == 3);
    CHECK(tiny.ratio_range.high == 5);
    CHECK(tiny.head_range.low == 4);
    CHECK(tiny.head_range.high == 8);
    CHECK(tiny.head_range.step == 4);
    CHECK(tiny.depth_range.low == 1);
    CHECK(tiny.depth_range.high == 8);
    CHECK(tiny.min_params == 4'000'000);
    CHECK(tiny.max_params == 5'000'000);

    const auto small = small_tier();
    CHECK(small.embed_range.low == 256);
    CHECK(small.embed_range.high == 512);
    CHECK(small.ratio_range.high == 5);
    CHECK(small.depth_range.low == 2);
    CHECK(small.depth_range.high == 12);
    CHECK(small.min_params == 11'000'000);
    CHECK(small.max_params == 15'000'000);

    const auto base = base_tier();
    CHECK(base.embed_range.low == 384);
    CHECK(base.embed_range.high == 768);
    CHECK(base.ratio_range.high == 6);
    CHECK(base.depth_range.low == 4);
    CHECK(base.depth_range.high == 15);
    CHECK(base.min_params == 25'000'000);
    CHECK(base.max_params == 35'000'000);

    for (const auto& t : {tiny, small, base}) CHECK(t.valid());
    CHECK(builtin_tier("tiny") != nullptr);
    CHECK(builtin_tier("nope") == nullptr);
}

TEST_CASE("sample stays on the tiny embed grid") {
    Rng rng(123);
    const auto tier = tiny_tier();
    const std::set<int> embed_grid = {192, 256, 320, 384};
    for (int i = 0; i < 200; ++i) {
        ArchGenome g = sample(tier, rng);
        CHECK(embed_grid.count(g.embed_dim) == 1);
        CHECK(validate(g, tier).ok);
    }
}

TEST_CASE("sample on a one-point space is the single genome") {
    Rng rng(0);
    ArchGenome g = sample(one_point_tier(), rng);
    CHECK(g == ArchGenome{192, 4, 4, 2});
}

TEST_CASE("sample is deterministic for a fixed seed") {
    Rng a(7), b(7);
    const auto tier = tiny_tier();
    for (int i = 0; i < 20; ++i) CHECK(sample(tier, a) == sample(tier, b));
}

TEST_CASE("mutate with zero probability is the identity") {
    Rng rng(5);
    const auto tier = tiny_tier();
    ArchGenome g{192, 4, 4, 2};
    CHECK(mutate(g, tier, 0.0, rng) == g);
}

TEST_CASE("mutate in a one-point space cannot move") {
    Rng rng(5);
    ArchGenome g{192, 4, 4, 2};
    CHECK(mutate(g, one_point_tier(), 1.0, rng) == g);
}

TEST_CASE("mutate with probability one changes every multi-point gene") {
    Rng rng(42);
    const auto tier = tiny_tier();
    const ArchGenome g{192, 4, 4, 2};
    ArchGenome m = mutate(g, tier, 1.0, rng);
    CHECK(m.embed_dim != g.embed_dim);
    CHECK(m.mlp_ratio != g.mlp_ratio);
    CHECK(m.num_heads != g.num_heads);
    CHECK(m.depth != g.depth);
    CHECK(validate(m, tier).ok);
    // Golden output of the seeded run; grid membership checked above.
    Rng rng2(42);
    CHECK(mutate(g, tier, 1.0, rng2) == m);
}

TEST_CASE("crossover of identical parents is the parent") {
    Rng rng(9);
    ArchGenome a{192, 3, 4, 1};
    CHECK(crossover(a, a, rng) == a);
}

TEST_CASE("crossover takes each gene from one of the parents") {
    Rng rng(11);
    const ArchGenome a{192, 3, 4, 1};
    const ArchGenome b{384, 5, 8, 8};
    for (int i = 0; i < 100; ++i) {
        ArchGenome c = crossover(a, b, rng);
        CHECK((c.embed_dim == a.embed_dim || c.embed_dim == b.embed_dim));
        CHECK((c.mlp_ratio == a.mlp_ratio || c.mlp_ratio == b.mlp_ratio));
        CHECK((c.num_heads == a.num_heads || c.num_heads == b.num_heads));
        CHECK((c.depth == a.depth || c.depth == b.depth));
        CHECK(validate(c, tiny_tier()).ok);
    }
}

TEST_CASE("crossover is deterministic for a fixed seed") {
    Rng a(3), b(3);
    ArchGenome p1{192, 3, 4, 1}, p2{384, 5, 8, 8};
    for (int i = 0; i < 20; ++i) CHECK(crossover(p1, p2, a) == crossover(p1, p2, b));
}

TEST_CASE("validate names the first violated constraint") {
    const auto tier = tiny_tier();
    CHECK(validate({192, 4, 4, 2}, tier).ok);
    {
        Verdict v = validate({200, 4, 4, 2}, tier);
        CHECK_FALSE(v.ok);
        CHECK(v.reason == "embed_dim off grid");
    }
    CHECK(validate({320, 4, 8, 2}, tier).ok);
    {
        // Off-grid and non-divisible: the grid check wins.
        Verdict v = validate({324, 4, 8, 2}, tier);
        CHECK_FALSE(v.ok);
        CHECK(v.reason == "embed_dim off grid");
    }
    {
        SearchSpaceTier custom = tier;
        custom.embed_range = {100, 300, 100};
        Verdict v = validate({100, 4, 8, 2}, custom);
        CHECK_FALSE(v.ok);
        CHECK(v.reason == "embed_dim not divisible by num_heads");
    }
}

TEST_CASE("closure: operators always produce valid genomes") {
    const SearchSpaceTier tiers[] = {tiny_tier(), small_tier(), base_tier()};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        for (const auto& tier : tiers) {
            ArchGenome a = sample(tier, rng);
            ArchGenome b = sample(tier, rng);
            CHECK(validate(a, tier).ok);
            CHECK(validate(b, tier).ok);
            ArchGenome m = mutate(a, tier, 0.5, rng);
            CHECK(validate(m, tier).ok);
            ArchGenome c = crossover(a, b, rng);
            CHECK(validate(c, tier).ok);
        }
    }
}

TEST_CASE("coverage: 10k tiny samples hit every grid point of every gene") {
    Rng rng(2024);
    const auto tier = tiny_tier();
    std::set<int> embeds, ratios, heads, depths;
    for (int i = 0; i < 10'000; ++i) {
        ArchGenome g = sample(tier, rng);
        embeds.insert(g.embed_dim);
        ratios.insert(g.mlp_ratio);
        heads.insert(g.num_heads);
        depths.insert(g.depth);
    }
    CHECK(int(embeds.size()) == tier.embed_range.count());
    CHECK(int(ratios.size()) == tier.ratio_range.count());
    CHECK(int(heads.size()) == tier.head_range.count());
    CHECK(int(depths.size()) == tier.depth_range.count());
}

TEST_CASE("CSV serialization column order") {
    CHECK(genome_csv_header() == "tier,embed_dim,mlp_ratio,num_heads,depth");
    CHECK(genome_csv_row("tiny", {256, 4, 4, 4}) == "tiny,256,4,4,4");
}

TEST_CASE("seq_len derives tokens from a 4x downsample") {
    RunConfig cfg;
    CHECK(seq_len(cfg) == 64);
    cfg.image_h = 64;
    cfg.image_w = 64;
    CHECK(seq_len(cfg) == 256);
    cfg.image_h = 30;
    CHECK_THROWS_AS(seq_len(cfg), std::invalid_argument);
}
