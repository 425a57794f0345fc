#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace stnas {

using Rng = std::mt19937_64;

/// Inclusive arithmetic grid: low, low+step, ..., high.
struct GeneRange {
    int low = 0;
    int high = 0;
    int step = 1;

    bool valid() const;
    int count() const;            // number of grid points
    int value_at(int k) const;    // k-th grid point, 0 <= k < count()
    bool contains(int v) const;
    std::vector<int> values() const;
};

/// One candidate architecture. All layers share the same shape.
struct ArchGenome {
    int embed_dim = 0;   // channel width d
    int mlp_ratio = 0;   // hidden dim = embed_dim * mlp_ratio
    int num_heads = 0;
    int depth = 0;       // number of transformer blocks

    int hidden_dim() const { return embed_dim * mlp_ratio; }
    bool operator==(const ArchGenome&) const = default;
};

/// Field-wise lexicographic order (embed, ratio, heads, depth).
bool lex_less(const ArchGenome& a, const ArchGenome& b);

/// A bounded search grid plus the parameter band candidates must stay in.
struct SearchSpaceTier {
    std::string name;
    GeneRange embed_range;
    GeneRange ratio_range;
    GeneRange head_range;
    GeneRange depth_range;
    std::uint64_t min_params = 0;
    std::uint64_t max_params = 0;

    bool valid() const;
    std::uint64_t grid_size() const;
};

SearchSpaceTier tiny_tier();
SearchSpaceTier small_tier();
SearchSpaceTier base_tier();

/// nullptr if `name` is not one of tiny/small/base.
const SearchSpaceTier* builtin_tier(const std::string& name);

/// Run-level configuration shared by scoring and simulation.
struct RunConfig {
    int timesteps = 4;
    int image_h = 32;
    int image_w = 32;
    int in_channels = 3;
    int num_classes = 10;
    std::uint64_t seed = 0;
};

inline constexpr int kPatchDownsample = 4;

/// Token count after patch embedding: (H/4) * (W/4).
/// Throws std::invalid_argument if H or W is not divisible by 4.
int seq_len(const RunConfig& cfg);

struct Verdict {
    bool ok = true;
    std::string reason;   // first violated constraint when !ok

    explicit operator bool() const { return ok; }
};

/// Checks grid membership of each gene (embed, ratio, heads, depth order),
/// then embed % heads divisibility. Reports the first violation.
Verdict validate(const ArchGenome& g, const SearchSpaceTier& tier);

/// Uniform sample over grid points, embed resampled (bounded) until
/// divisible by the sampled head count. Does not enforce the param band.
ArchGenome sample(const SearchSpaceTier& tier, Rng& rng);

/// Each gene independently resampled to a different grid value with
/// probability per_gene_prob. Genes on one-point grids never change.
ArchGenome mutate(const ArchGenome& g, const SearchSpaceTier& tier,
                  double per_gene_prob, Rng& rng);

/// Uniform gene-wise crossover.
ArchGenome crossover(const ArchGenome& a, const ArchGenome& b, Rng& rng);

// CSV column order: tier,embed_dim,mlp_ratio,num_heads,depth
std::string genome_csv_header();
std::string genome_csv_row(const std::string& tier_name, const ArchGenome& g);

}  // namespace stnas
