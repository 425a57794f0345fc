#include "stnas/genome.hpp"

#include <stdexcept>

namespace stnas {

namespace {

// Deterministic index pick; modulo bias is negligible for grids this small.
int pick_index(Rng& rng, int n) {
    return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

int pick_value(const GeneRange& r, Rng& rng) {
    return r.value_at(pick_index(rng, r.count()));
}

// Uniform pick among grid values != current. No-op on one-point grids.
int pick_other_value(const GeneRange& r, int current, Rng& rng) {
    const int n = r.count();
    if (n <= 1) return current;
    int k = pick_index(rng, n - 1);
    int v = r.value_at(k);
    if (v == current) v = r.value_at(n - 1);
    return v;
}

constexpr int kDivisibilityRetries = 16;

// Resample embed_dim until divisible by heads. Table 2 grids are always
// divisible; this path only triggers on custom tiers. On exhaustion the
// genome is returned as-is and fails validate().
void repair_divisibility(ArchGenome& g, const SearchSpaceTier& tier, Rng& rng) {
    for (int i = 0; i < kDivisibilityRetries && g.embed_dim % g.num_heads != 0; ++i) {
        g.embed_dim = pick_value(tier.embed_range, rng);
    }
}

}  // namespace

bool GeneRange::valid() const {
    return low > 0 && low <= high && step >= 1 && (high - low) % step == 0;
}

int GeneRange::count() const { return (high - low) / step + 1; }

int GeneRange::value_at(int k) const { return low + k * step; }

bool GeneRange::contains(int v) const {
    return v >= low && v <= high && (v - low) % step == 0;
}

std::vector<int> GeneRange::values() const {
    std::vector<int> out;
    out.reserve(count());
    for (int v = low; v <= high; v += step) out.push_back(v);
    return out;
}

bool lex_less(const ArchGenome& a, const ArchGenome& b) {
    if (a.embed_dim != b.embed_dim) return a.embed_dim < b.embed_dim;
    if (a.mlp_ratio != b.mlp_ratio) return a.mlp_ratio < b.mlp_ratio;
    if (a.num_heads != b.num_heads) return a.num_heads < b.num_heads;
    return a.depth < b.depth;
}

bool SearchSpaceTier::valid() const {
    return embed_range.valid() && ratio_range.valid() && head_range.valid() &&
           depth_range.valid() && min_params < max_params;
}

std::uint64_t SearchSpaceTier::grid_size() const {
    return static_cast<std::uint64_t>(embed_range.count()) * ratio_range.count() *
           head_range.count() * depth_range.count();
}

SearchSpaceTier tiny_tier() {
    return {"tiny", {192, 384, 64}, {3, 5, 1}, {4, 8, 4}, {1, 8, 1},
            4'000'000, 5'000'000};
}

SearchSpaceTier small_tier() {
    return {"small", {256, 512, 64}, {3, 5, 1}, {4, 8, 4}, {2, 12, 1},
            11'000'000, 15'000'000};
}

SearchSpaceTier base_tier() {
    return {"base", {384, 768, 64}, {3, 6, 1}, {4, 8, 4}, {4, 15, 1},
            25'000'000, 35'000'000};
}

const SearchSpaceTier* builtin_tier(const std::string& name) {
    static const SearchSpaceTier tiers[] = {tiny_tier(), small_tier(), base_tier()};
    for (const auto& t : tiers)
        if (t.name == name) return &t;
    return nullptr;
}

int seq_len(const RunConfig& cfg) {
    if (cfg.image_h % kPatchDownsample != 0 || cfg.image_w % kPatchDownsample != 0)
        throw std::invalid_argument("image size not divisible by patch downsample factor 4");
    return (cfg.image_h / kPatchDownsample) * (cfg.image_w / kPatchDownsample);
}

Verdict validate(const ArchGenome& g, const SearchSpaceTier& tier) {
    if (!tier.embed_range.contains(g.embed_dim)) return {false, "embed_dim off grid"};
    if (!tier.ratio_range.contains(g.mlp_ratio)) return {false, "mlp_ratio off grid"};
    if (!tier.head_range.contains(g.num_heads)) return {false, "num_heads off grid"};
    if (!tier.depth_range.contains(g.depth)) return {false, "depth off grid"};
    if (g.embed_dim % g.num_heads != 0)
        return {false, "embed_dim not divisible by num_heads"};
    return {};
}

ArchGenome sample(const SearchSpaceTier& tier, Rng& rng) {
    ArchGenome g;
    g.embed_dim = pick_value(tier.embed_range, rng);
    g.mlp_ratio = pick_value(tier.ratio_range, rng);
    g.num_heads = pick_value(tier.head_range, rng);
    g.depth = pick_value(tier.depth_range, rng);
    repair_divisibility(g, tier, rng);
    return g;
}

ArchGenome mutate(const ArchGenome& g, const SearchSpaceTier& tier,
                  double per_gene_prob, Rng& rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    ArchGenome out = g;
    if (coin(rng) < per_gene_prob)
        out.embed_dim = pick_other_value(tier.embed_range, out.embed_dim, rng);
    if (coin(rng) < per_gene_prob)
        out.mlp_ratio = pick_other_value(tier.ratio_range, out.mlp_ratio, rng);
    if (coin(rng) < per_gene_prob)
        out.num_heads = pick_other_value(tier.head_range, out.num_heads, rng);
    if (coin(rng) < per_gene_prob)
        out.depth = pick_other_value(tier.depth_range, out.depth, rng);
    repair_divisibility(out, tier, rng);
    return out;
}

ArchGenome crossover(const ArchGenome& a, const ArchGenome& b, Rng& rng) {
    ArchGenome out;
    out.embed_dim = (rng() & 1u) ? a.embed_dim : b.embed_dim;
    out.mlp_ratio = (rng() & 1u) ? a.mlp_ratio : b.mlp_ratio;
    out.num_heads = (rng() & 1u) ? a.num_heads : b.num_heads;
    out.depth = (rng() & 1u) ? a.depth : b.depth;
    // Parents share a tier by precondition; reuse either embed grid for repair.
    if (out.embed_dim % out.num_heads != 0) {
        // Choose among the parents' embed values that divide; deterministic.
        if (a.embed_dim % out.num_heads == 0)
            out.embed_dim = a.embed_dim;
        else if (b.embed_dim % out.num_heads == 0)
            out.embed_dim = b.embed_dim;
    }
    return out;
}

std::string genome_csv_header() { return "tier,embed_dim,mlp_ratio,num_heads,depth"; }

std::string genome_csv_row(const std::string& tier_name, const ArchGenome& g) {
    return tier_name + "," + std::to_string(g.embed_dim) + "," +
           std::to_string(g.mlp_ratio) + "," + std::to_string(g.num_heads) + "," +
           std::to_string(g.depth);
}

}  // namespace stnas
