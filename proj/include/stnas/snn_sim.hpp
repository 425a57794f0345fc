#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "stnas/genome.hpp"

namespace stnas::sim {

struct LifParams {
    double tau = 2.0;
    double v_th = 1.0;
    double v_reset = 0.0;
};

/// Per-neuron membrane potential carried across timesteps.
struct LifState {
    Eigen::ArrayXf v;
};

/// Step function: 1 for v >= 0, else 0. Throws on NaN.
int heaviside(double v);

/// One LIF update over a vector of neurons:
///   H = V + (1/tau)(X - (V - V_reset)), S = step(H - V_th),
///   V' = H(1-S) + V_reset*S.
/// Returns the spike vector; state is updated in place.
Eigen::ArrayXf lif_step(LifState& state, const Eigen::ArrayXf& input, const LifParams& p);

/// Binary activations, one tokens x channels matrix per timestep.
struct SpikeTensor {
    int timesteps = 0;
    int tokens = 0;
    int channels = 0;
    std::vector<Eigen::MatrixXf> steps;

    bool is_binary() const;
};

/// Input image sequence; each step is channels x (height*width),
/// spatial index y*width + x.
struct ImageSeq {
    int timesteps = 0;
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<Eigen::MatrixXf> steps;
};

/// Dense multiply-accumulate counts, incremented at each GEMM site.
/// Spike sparsity is deliberately ignored.
struct MacCounter {
    std::uint64_t sa_macs = 0;
    std::uint64_t mlp_macs = 0;
    std::uint64_t spe_macs = 0;
};

/// 3x3 conv, padding 1, bias-free. weight is out_ch x (9*in_ch).
struct ConvLayer {
    int in_ch = 0;
    int out_ch = 0;
    int stride = 1;
    Eigen::MatrixXf weight;
};

struct BlockWeights {
    Eigen::MatrixXf wq, wk, wv, wo;   // d x d
    Eigen::MatrixXf w1;               // d x d_mlp
    Eigen::MatrixXf w2;               // d_mlp x d
};

struct ModelWeights {
    std::vector<ConvLayer> spe;       // ladder convs, position conv last
    std::vector<BlockWeights> blocks;
    Eigen::MatrixXf head;             // d x num_classes
};

/// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] init, untrained by design.
ModelWeights init_weights(const ArchGenome& g, const RunConfig& cfg, std::uint64_t seed);
ModelWeights zero_weights(const ArchGenome& g, const RunConfig& cfg);

/// Uniform [0,1) pixels, independent per timestep.
ImageSeq random_images(const RunConfig& cfg, std::uint64_t seed);
ImageSeq zero_images(const RunConfig& cfg);

/// Patch embedding: conv ladder c_in -> d/8 -> d/4 -> d/2 -> d (two stride-2
/// stages) plus a d -> d position conv, each followed by LIF. Output is
/// (T, (H/4)(W/4), d) binary.
SpikeTensor spe_forward(const ImageSeq& img, const ArchGenome& g, const RunConfig& cfg,
                        const std::vector<ConvLayer>& convs, MacCounter& ctr);

/// Spiking self attention: per-head Q/K/V projections with LIF, (Q K^T) V
/// scaled by 1/8 then LIF, output projection with LIF. No softmax.
SpikeTensor ssa_forward(const SpikeTensor& x, const ArchGenome& g,
                        const BlockWeights& w, MacCounter& ctr);

/// Two linears d -> d_mlp -> d, each followed by LIF.
SpikeTensor smlp_forward(const SpikeTensor& x, const ArchGenome& g,
                         const BlockWeights& w, MacCounter& ctr);

/// Full forward: patch embedding, depth x (attention + residual,
/// MLP + residual), average pooling over (T, tokens), classifier head.
/// Residual sums are real-valued and re-enter through an LIF bank.
Eigen::VectorXf model_forward(const ImageSeq& img, const ArchGenome& g, const RunConfig& cfg,
                              const ModelWeights& w, MacCounter& ctr);

/// Closed-form dense MAC count of the conv ladder for one full pass.
std::uint64_t spe_dense_macs(const ArchGenome& g, const RunConfig& cfg);

struct VerifyReport {
    struct Identity {
        std::string name;
        std::uint64_t counted = 0;
        std::uint64_t expected = 0;
        bool ok() const { return counted == expected; }
    };
    std::vector<Identity> identities;

    bool passed() const;
    std::string to_text() const;   // one line per identity: name lhs rhs pass/fail
};

/// Builds the MAC-identity report from already-collected counters.
VerifyReport make_verify_report(const MacCounter& ctr, const ArchGenome& g,
                                const RunConfig& cfg);

/// Runs a full forward with seeded random weights and input, then checks
/// mlp_macs == T*flops_mlp and sa_macs == 2*T*flops_sa.
VerifyReport verify_flops(const ArchGenome& g, const RunConfig& cfg);

}  // namespace stnas::sim
