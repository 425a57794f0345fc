#pragma once

#include <cstdint>

#include "stnas/genome.hpp"

namespace stnas::cost {

/// Itemized analytic FLOPs for a genome. snn_total is the search metric.
struct FlopsBreakdown {
    std::uint64_t sa_flops = 0;
    std::uint64_t mlp_flops = 0;
    std::uint64_t ann_total = 0;   // sa_flops + mlp_flops
    std::uint64_t snn_total = 0;   // timesteps * ann_total
};

struct ParamBreakdown {
    std::uint64_t block_params = 0;
    std::uint64_t spe_params = 0;
    std::uint64_t head_params = 0;
    std::uint64_t total = 0;
};

// Exact integer arithmetic throughout; any overflow of uint64 throws
// std::overflow_error rather than wrapping.

/// depth * seq_len * embed * (2*embed + seq_len)
std::uint64_t flops_sa(std::uint64_t depth, std::uint64_t seq_len, std::uint64_t embed_dim);

/// 2 * depth * seq_len * embed * hidden
std::uint64_t flops_mlp(std::uint64_t depth, std::uint64_t seq_len, std::uint64_t embed_dim,
                        std::uint64_t hidden_dim);

FlopsBreakdown flops_snn(const ArchGenome& g, const RunConfig& cfg);

/// Attention/MLP block weights, the conv patch-embedding ladder
/// (3 -> d/8 -> d/4 -> d/2 -> d plus a d -> d position conv, 3x3 bias-free),
/// and the classifier head. Norm/bias parameters are ignored (sub-0.5%).
/// Throws std::invalid_argument unless embed_dim is divisible by 8.
ParamBreakdown param_count(const ArchGenome& g, const RunConfig& cfg);

/// total params within [tier.min_params, tier.max_params], inclusive.
bool in_band(const ArchGenome& g, const SearchSpaceTier& tier, const RunConfig& cfg);

/// CSV column order for score output.
inline const char* score_csv_header() {
    return "sa_flops,mlp_flops,ann_total,snn_total,total_params";
}

}  // namespace stnas::cost
