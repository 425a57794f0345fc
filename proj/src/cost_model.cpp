#include "stnas/cost_model.hpp"

#include <stdexcept>

namespace stnas::cost {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("FLOPs overflow in multiply");
    return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("FLOPs overflow in add");
    return r;
}

}  // namespace

std::uint64_t flops_sa(std::uint64_t depth, std::uint64_t seq_len, std::uint64_t embed_dim) {
    const std::uint64_t inner = checked_add(checked_mul(2, embed_dim), seq_len);
    return checked_mul(checked_mul(checked_mul(depth, seq_len), embed_dim), inner);
}

std::uint64_t flops_mlp(std::uint64_t depth, std::uint64_t seq_len, std::uint64_t embed_dim,
                        std::uint64_t hidden_dim) {
    return checked_mul(checked_mul(checked_mul(checked_mul(2, depth), seq_len), embed_dim),
                       hidden_dim);
}

FlopsBreakdown flops_snn(const ArchGenome& g, const RunConfig& cfg) {
    const std::uint64_t n = static_cast<std::uint64_t>(seq_len(cfg));
    FlopsBreakdown b;
    b.sa_flops = flops_sa(g.depth, n, g.embed_dim);
    b.mlp_flops = flops_mlp(g.depth, n, g.embed_dim, g.hidden_dim());
    b.ann_total = checked_add(b.sa_flops, b.mlp_flops);
    b.snn_total = checked_mul(static_cast<std::uint64_t>(cfg.timesteps), b.ann_total);
    return b;
}

ParamBreakdown param_count(const ArchGenome& g, const RunConfig& cfg) {
    if (g.embed_dim % 8 != 0)
        throw std::invalid_argument("embed_dim must be divisible by 8 for the conv ladder");
    const std::uint64_t d = g.embed_dim;
    const std::uint64_t d_mlp = g.hidden_dim();
    const std::uint64_t c_in = cfg.in_channels;

    ParamBreakdown p;
    p.block_params = checked_mul(
        g.depth, checked_add(checked_mul(4, checked_mul(d, d)),
                             checked_mul(2, checked_mul(d, d_mlp))));
    const std::uint64_t ladder = checked_mul(c_in, d / 8) + (d / 8) * (d / 4) +
                                 (d / 4) * (d / 2) + (d / 2) * d;
    p.spe_params = checked_add(checked_mul(9, ladder), checked_mul(9, checked_mul(d, d)));
    p.head_params = checked_mul(d, static_cast<std::uint64_t>(cfg.num_classes));
    p.total = checked_add(checked_add(p.block_params, p.spe_params), p.head_params);
    return p;
}

bool in_band(const ArchGenome& g, const SearchSpaceTier& tier, const RunConfig& cfg) {
    const std::uint64_t total = param_count(g, cfg).total;
    return total >= tier.min_params && total <= tier.max_params;
}

}  // namespace stnas::cost
