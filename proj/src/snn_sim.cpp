#include "stnas/snn_sim.hpp"

#include <cmath>
#include <stdexcept>

#include "stnas/cost_model.hpp"

namespace stnas::sim {

namespace {

constexpr float kAttnScale = 0.125f;

// All dense products go through here so the counter reflects the
// dimensions actually multiplied.
template <class A, class B>
Eigen::MatrixXf matmul(const A& a, const B& b, std::uint64_t& macs) {
    macs += static_cast<std::uint64_t>(a.rows()) * static_cast<std::uint64_t>(a.cols()) *
            static_cast<std::uint64_t>(b.cols());
    return a * b;
}

Eigen::ArrayXf flatten(const Eigen::MatrixXf& m) {
    return Eigen::Map<const Eigen::ArrayXf>(m.data(), m.size());
}

Eigen::MatrixXf unflatten(const Eigen::ArrayXf& v, int rows, int cols) {
    return Eigen::Map<const Eigen::MatrixXf>(v.data(), rows, cols);
}

// LIF bank over a tokens x channels matrix; state is lazily sized on
// first use and persists across timesteps.
Eigen::MatrixXf lif_matrix(LifState& state, const Eigen::MatrixXf& input, const LifParams& p) {
    if (state.v.size() == 0) state.v = Eigen::ArrayXf::Constant(input.size(), float(p.v_reset));
    Eigen::ArrayXf spikes = lif_step(state, flatten(input), p);
    return unflatten(spikes, int(input.rows()), int(input.cols()));
}

int conv_out_dim(int in, int stride) { return (in + 2 - 3) / stride + 1; }

// im2col for a 3x3 kernel with padding 1. Returns (9*in_ch) x (Hout*Wout).
Eigen::MatrixXf im2col(const Eigen::MatrixXf& input, int h, int w, int stride) {
    const int c = int(input.rows());
    const int ho = conv_out_dim(h, stride);
    const int wo = conv_out_dim(w, stride);
    Eigen::MatrixXf col = Eigen::MatrixXf::Zero(9 * c, ho * wo);
    for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
            const int out_idx = oy * wo + ox;
            for (int ky = 0; ky < 3; ++ky) {
                const int iy = oy * stride + ky - 1;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const int ix = ox * stride + kx - 1;
                    if (ix < 0 || ix >= w) continue;
                    col.block((ky * 3 + kx) * c, out_idx, c, 1) =
                        input.col(iy * w + ix);
                }
            }
        }
    }
    return col;
}

// out_ch x (Hout*Wout)
Eigen::MatrixXf conv_forward(const ConvLayer& conv, const Eigen::MatrixXf& input,
                             int h, int w, std::uint64_t& macs) {
    if (int(input.rows()) != conv.in_ch)
        throw std::invalid_argument("conv input channel mismatch");
    return matmul(conv.weight, im2col(input, h, w, conv.stride), macs);
}

Eigen::MatrixXf uniform_matrix(int rows, int cols, float bound, Rng& rng) {
    std::uniform_real_distribution<float> dist(-bound, bound);
    Eigen::MatrixXf m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

Eigen::MatrixXf fan_in_init(int rows, int cols, int fan_in, Rng& rng) {
    return uniform_matrix(rows, cols, 1.0f / std::sqrt(float(fan_in)), rng);
}

std::vector<int> spe_channels(const ArchGenome& g, const RunConfig& cfg) {
    const int d = g.embed_dim;
    return {cfg.in_channels, d / 8, d / 4, d / 2, d, d};
}

std::vector<int> spe_strides() { return {2, 2, 1, 1, 1}; }

void check_weights(const ArchGenome& g, const RunConfig& cfg, const ModelWeights& w) {
    const int d = g.embed_dim;
    if (int(w.blocks.size()) != g.depth)
        throw std::invalid_argument("weight/genome mismatch: block count != depth");
    for (const auto& b : w.blocks) {
        if (b.wq.rows() != d || b.wq.cols() != d || b.w1.cols() != g.hidden_dim() ||
            b.w2.rows() != g.hidden_dim())
            throw std::invalid_argument("weight/genome mismatch: block shapes");
    }
    if (w.spe.size() != 5 || w.spe.back().out_ch != d)
        throw std::invalid_argument("weight/genome mismatch: patch embedding ladder");
    if (w.head.rows() != d || w.head.cols() != cfg.num_classes)
        throw std::invalid_argument("weight/genome mismatch: classifier head");
}

void check_binary(const SpikeTensor& x, const char* op) {
    if (!x.is_binary()) throw std::invalid_argument(std::string(op) + ": non-binary input");
}

// Residual LIF front-end: per-timestep real input, binary output.
SpikeTensor lif_bank_forward(const std::vector<Eigen::MatrixXf>& real_steps,
                             int tokens, int channels, const LifParams& p) {
    SpikeTensor out;
    out.timesteps = int(real_steps.size());
    out.tokens = tokens;
    out.channels = channels;
    LifState state;
    for (const auto& step : real_steps) out.steps.push_back(lif_matrix(state, step, p));
    return out;
}

}  // namespace

int heaviside(double v) {
    if (std::isnan(v)) throw std::invalid_argument("heaviside: NaN input");
    return v >= 0.0 ? 1 : 0;
}

Eigen::ArrayXf lif_step(LifState& state, const Eigen::ArrayXf& input, const LifParams& p) {
    if (state.v.size() != input.size())
        throw std::invalid_argument("lif_step: state/input length mismatch");
    const float tau_inv = float(1.0 / p.tau);
    const float v_reset = float(p.v_reset);
    const float v_th = float(p.v_th);
    Eigen::ArrayXf h = state.v + tau_inv * (input - (state.v - v_reset));
    Eigen::ArrayXf spikes = (h >= v_th).cast<float>();
    state.v = h * (1.0f - spikes) + v_reset * spikes;
    return spikes;
}

bool SpikeTensor::is_binary() const {
    for (const auto& m : steps)
        if (!((m.array() == 0.0f) || (m.array() == 1.0f)).all()) return false;
    return true;
}

ModelWeights init_weights(const ArchGenome& g, const RunConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const int d = g.embed_dim;
    const int d_mlp = g.hidden_dim();
    ModelWeights w;
    const auto chans = spe_channels(g, cfg);
    const auto strides = spe_strides();
    for (int i = 0; i < 5; ++i) {
        ConvLayer conv{chans[i], chans[i + 1], strides[i], {}};
        conv.weight = fan_in_init(conv.out_ch, 9 * conv.in_ch, 9 * conv.in_ch, rng);
        w.spe.push_back(std::move(conv));
    }
    for (int l = 0; l < g.depth; ++l) {
        BlockWeights b;
        b.wq = fan_in_init(d, d, d, rng);
        b.wk = fan_in_init(d, d, d, rng);
        b.wv = fan_in_init(d, d, d, rng);
        b.wo = fan_in_init(d, d, d, rng);
        b.w1 = fan_in_init(d, d_mlp, d, rng);
        b.w2 = fan_in_init(d_mlp, d, d_mlp, rng);
        w.blocks.push_back(std::move(b));
    }
    w.head = fan_in_init(d, cfg.num_classes, d, rng);
    return w;
}

ModelWeights zero_weights(const ArchGenome& g, const RunConfig& cfg) {
    ModelWeights w = init_weights(g, cfg, 0);
    for (auto& conv : w.spe) conv.weight.setZero();
    for (auto& b : w.blocks) {
        b.wq.setZero(); b.wk.setZero(); b.wv.setZero(); b.wo.setZero();
        b.w1.setZero(); b.w2.setZero();
    }
    w.head.setZero();
    return w;
}

ImageSeq random_images(const RunConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    ImageSeq img{cfg.timesteps, cfg.in_channels, cfg.image_h, cfg.image_w, {}};
    for (int t = 0; t < cfg.timesteps; ++t) {
        Eigen::MatrixXf step(cfg.in_channels, cfg.image_h * cfg.image_w);
        for (int j = 0; j < step.cols(); ++j)
            for (int i = 0; i < step.rows(); ++i) step(i, j) = dist(rng);
        img.steps.push_back(std::move(step));
    }
    return img;
}

ImageSeq zero_images(const RunConfig& cfg) {
    ImageSeq img{cfg.timesteps, cfg.in_channels, cfg.image_h, cfg.image_w, {}};
    for (int t = 0; t < cfg.timesteps; ++t)
        img.steps.emplace_back(
            Eigen::MatrixXf::Zero(cfg.in_channels, cfg.image_h * cfg.image_w));
    return img;
}

SpikeTensor spe_forward(const ImageSeq& img, const ArchGenome& g, const RunConfig& cfg,
                        const std::vector<ConvLayer>& convs, MacCounter& ctr) {
    if (img.height % kPatchDownsample != 0 || img.width % kPatchDownsample != 0)
        throw std::invalid_argument("spe_forward: image size not divisible by 4");
    if (img.channels != cfg.in_channels || int(img.steps.size()) != img.timesteps)
        throw std::invalid_argument("spe_forward: image shape mismatch");
    if (convs.size() != 5) throw std::invalid_argument("spe_forward: expected 5 convs");

    const int n = seq_len(cfg);
    SpikeTensor out{img.timesteps, n, g.embed_dim, {}};
    const LifParams lif;
    std::vector<LifState> states(convs.size());
    for (int t = 0; t < img.timesteps; ++t) {
        Eigen::MatrixXf cur = img.steps[t];
        int h = img.height, w = img.width;
        for (size_t i = 0; i < convs.size(); ++i) {
            Eigen::MatrixXf pre = conv_forward(convs[i], cur, h, w, ctr.spe_macs);
            h = conv_out_dim(h, convs[i].stride);
            w = conv_out_dim(w, convs[i].stride);
            cur = lif_matrix(states[i], pre, lif);
        }
        out.steps.push_back(cur.transpose());   // tokens x channels
    }
    return out;
}

SpikeTensor ssa_forward(const SpikeTensor& x, const ArchGenome& g,
                        const BlockWeights& w, MacCounter& ctr) {
    check_binary(x, "ssa_forward");
    const int d = g.embed_dim;
    const int heads = g.num_heads;
    const int dh = d / heads;
    const LifParams lif;
    LifState sq, sk, sv, sattn, sout;
    SpikeTensor out{x.timesteps, x.tokens, d, {}};
    for (int t = 0; t < x.timesteps; ++t) {
        const Eigen::MatrixXf& in = x.steps[t];
        Eigen::MatrixXf q = lif_matrix(sq, matmul(in, w.wq, ctr.sa_macs), lif);
        Eigen::MatrixXf k = lif_matrix(sk, matmul(in, w.wk, ctr.sa_macs), lif);
        Eigen::MatrixXf v = lif_matrix(sv, matmul(in, w.wv, ctr.sa_macs), lif);
        Eigen::MatrixXf attn_pre(x.tokens, d);
        for (int hd = 0; hd < heads; ++hd) {
            auto qh = q.middleCols(hd * dh, dh);
            auto kh = k.middleCols(hd * dh, dh);
            auto vh = v.middleCols(hd * dh, dh);
            Eigen::MatrixXf scores = matmul(qh, kh.transpose(), ctr.sa_macs);
            attn_pre.middleCols(hd * dh, dh) =
                matmul(scores, vh, ctr.sa_macs) * kAttnScale;
        }
        Eigen::MatrixXf s = lif_matrix(sattn, attn_pre, lif);
        out.steps.push_back(lif_matrix(sout, matmul(s, w.wo, ctr.sa_macs), lif));
    }
    return out;
}

SpikeTensor smlp_forward(const SpikeTensor& x, const ArchGenome& g,
                         const BlockWeights& w, MacCounter& ctr) {
    check_binary(x, "smlp_forward");
    const LifParams lif;
    LifState s1, s2;
    SpikeTensor out{x.timesteps, x.tokens, g.embed_dim, {}};
    for (int t = 0; t < x.timesteps; ++t) {
        Eigen::MatrixXf hidden = lif_matrix(s1, matmul(x.steps[t], w.w1, ctr.mlp_macs), lif);
        out.steps.push_back(lif_matrix(s2, matmul(hidden, w.w2, ctr.mlp_macs), lif));
    }
    return out;
}

Eigen::VectorXf model_forward(const ImageSeq& img, const ArchGenome& g, const RunConfig& cfg,
                              const ModelWeights& w, MacCounter& ctr) {
    if (g.embed_dim <= 0 || g.mlp_ratio <= 0 || g.num_heads <= 0 || g.depth < 0 ||
        g.embed_dim % g.num_heads != 0 || g.embed_dim % 8 != 0)
        throw std::invalid_argument("model_forward: invalid genome");
    check_weights(g, cfg, w);

    const LifParams lif;
    SpikeTensor x = spe_forward(img, g, cfg, w.spe, ctr);
    for (int l = 0; l < g.depth; ++l) {
        SpikeTensor attn = ssa_forward(x, g, w.blocks[l], ctr);
        std::vector<Eigen::MatrixXf> sum1;
        for (int t = 0; t < x.timesteps; ++t) sum1.push_back(attn.steps[t] + x.steps[t]);
        SpikeTensor mid = lif_bank_forward(sum1, x.tokens, x.channels, lif);

        SpikeTensor mlp = smlp_forward(mid, g, w.blocks[l], ctr);
        std::vector<Eigen::MatrixXf> sum2;
        for (int t = 0; t < x.timesteps; ++t) sum2.push_back(mlp.steps[t] + mid.steps[t]);
        x = lif_bank_forward(sum2, x.tokens, x.channels, lif);
    }

    // Global average pool over (timesteps, tokens), then the head.
    Eigen::RowVectorXf pooled = Eigen::RowVectorXf::Zero(g.embed_dim);
    for (const auto& step : x.steps) pooled += step.colwise().sum();
    pooled /= float(x.timesteps) * float(x.tokens);
    return (pooled * w.head).transpose();
}

std::uint64_t spe_dense_macs(const ArchGenome& g, const RunConfig& cfg) {
    const auto chans = spe_channels(g, cfg);
    const auto strides = spe_strides();
    std::uint64_t total = 0;
    int h = cfg.image_h, w = cfg.image_w;
    for (int i = 0; i < 5; ++i) {
        h = conv_out_dim(h, strides[i]);
        w = conv_out_dim(w, strides[i]);
        total += std::uint64_t(9) * chans[i] * chans[i + 1] * h * w;
    }
    return total * cfg.timesteps;
}

bool VerifyReport::passed() const {
    for (const auto& id : identities)
        if (!id.ok()) return false;
    return true;
}

std::string VerifyReport::to_text() const {
    std::string out;
    for (const auto& id : identities) {
        out += id.name + " counted=" + std::to_string(id.counted) +
               " expected=" + std::to_string(id.expected) +
               (id.ok() ? " pass" : " FAIL") + "\n";
    }
    return out;
}

VerifyReport make_verify_report(const MacCounter& ctr, const ArchGenome& g,
                                const RunConfig& cfg) {
    const std::uint64_t t = cfg.timesteps;
    const std::uint64_t n = seq_len(cfg);
    VerifyReport rep;
    rep.identities.push_back(
        {"mlp_macs", ctr.mlp_macs,
         t * cost::flops_mlp(g.depth, n, g.embed_dim, g.hidden_dim())});
    rep.identities.push_back(
        {"sa_macs", ctr.sa_macs, 2 * t * cost::flops_sa(g.depth, n, g.embed_dim)});
    return rep;
}

VerifyReport verify_flops(const ArchGenome& g, const RunConfig& cfg) {
    ModelWeights w = init_weights(g, cfg, cfg.seed);
    ImageSeq img = random_images(cfg, cfg.seed + 1);
    MacCounter ctr;
    model_forward(img, g, cfg, w, ctr);
    return make_verify_report(ctr, g, cfg);
}

}  // namespace stnas::sim
