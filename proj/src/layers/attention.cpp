#include "phishkit/layers/attention.hpp"

#include <cmath>

#include "phishkit/error.hpp"

namespace phishkit::layers {

namespace ops = phishkit::numerics;

namespace {
constexpr double kMaskPenalty = -1e30;
}

AttentionParams AttentionParams::init(std::size_t model_dim,
                                      std::size_t proj_dim, Rng& rng) {
    return {xavier_uniform(model_dim, proj_dim, rng),
            xavier_uniform(model_dim, proj_dim, rng),
            xavier_uniform(model_dim, proj_dim, rng)};
}

std::vector<std::pair<std::string, Tensor>> AttentionParams::named(
    const std::string& prefix) const {
    return {{prefix + ".w_q", w_q}, {prefix + ".w_k", w_k}, {prefix + ".w_v", w_v}};
}

MultiHeadParams MultiHeadParams::init(std::size_t model_dim,
                                      std::size_t n_heads,
                                      std::size_t head_dim,
                                      std::size_t out_dim, Rng& rng) {
    MultiHeadParams p;
    for (std::size_t h = 0; h < n_heads; ++h)
        p.heads.push_back(AttentionParams::init(model_dim, head_dim, rng));
    p.w_o = xavier_uniform(n_heads * head_dim, out_dim, rng);
    p.b_o = Tensor::param(std::vector<double>(out_dim, 0.0), {out_dim});
    return p;
}

std::vector<std::pair<std::string, Tensor>> MultiHeadParams::named(
    const std::string& prefix) const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (std::size_t h = 0; h < heads.size(); ++h) {
        auto head = heads[h].named(prefix + ".head" + std::to_string(h));
        out.insert(out.end(), head.begin(), head.end());
    }
    out.emplace_back(prefix + ".w_o", w_o);
    out.emplace_back(prefix + ".b_o", b_o);
    return out;
}

namespace {

// Scaled dot-product over one sample's [T x D] projections; mask may be
// empty (no padding) or hold an additive [T x T] penalty.
Tensor scaled_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                        const Tensor* mask) {
    const double inv_scale = 1.0 / std::sqrt(double(q.cols()));
    Tensor scores = ops::scale(ops::matmul_nt(q, k), inv_scale);
    Tensor attn = mask ? ops::row_softmax_masked(scores, *mask)
                       : ops::row_softmax(scores);
    return ops::matmul(attn, v);
}

Tensor key_mask(const SeqBatch& h, std::size_t b) {
    std::vector<double> m(h.steps * h.steps, 0.0);
    for (std::size_t key = 0; key < h.steps; ++key) {
        if (h.mask[h.row(b, key)] == 0.0)
            for (std::size_t query = 0; query < h.steps; ++query)
                m[query * h.steps + key] = kMaskPenalty;
    }
    return Tensor::from(std::move(m), {h.steps, h.steps});
}

Tensor single_batch_ctx(const SeqBatch& h, const AttentionParams& p) {
    Tensor q = ops::matmul(h.data, p.w_q);
    Tensor k = ops::matmul(h.data, p.w_k);
    Tensor v = ops::matmul(h.data, p.w_v);
    std::vector<Tensor> ctx;
    ctx.reserve(h.batch);
    for (std::size_t b = 0; b < h.batch; ++b) {
        Tensor qb = ops::slice_rows(q, b * h.steps, h.steps);
        Tensor kb = ops::slice_rows(k, b * h.steps, h.steps);
        Tensor vb = ops::slice_rows(v, b * h.steps, h.steps);
        Tensor mask = key_mask(h, b);
        ctx.push_back(scaled_attention(qb, kb, vb, &mask));
    }
    return ops::concat_rows(ctx); // already batch-major
}

} // namespace

AttentionOutput attention_single(const Tensor& h, const AttentionParams& p) {
    if (h.rows() == 0) throw ParameterError("attention_single: empty sequence");
    Tensor q = ops::matmul(h, p.w_q);
    Tensor k = ops::matmul(h, p.w_k);
    Tensor v = ops::matmul(h, p.w_v);
    Tensor ctx = scaled_attention(q, k, v, nullptr);
    return {ctx, global_average_pool(ctx)};
}

Tensor attention_multihead(const Tensor& h, const MultiHeadParams& p) {
    if (p.heads.empty()) throw ParameterError("attention_multihead: no heads");
    std::vector<Tensor> outs;
    outs.reserve(p.heads.size());
    for (const auto& head : p.heads) {
        Tensor q = ops::matmul(h, head.w_q);
        Tensor k = ops::matmul(h, head.w_k);
        Tensor v = ops::matmul(h, head.w_v);
        outs.push_back(scaled_attention(q, k, v, nullptr));
    }
    Tensor cat = ops::concat_cols(outs);
    if (cat.cols() != p.w_o.rows())
        throw DimensionError("attention_multihead: concat width " +
                             std::to_string(cat.cols()) +
                             " does not match w_o rows " +
                             std::to_string(p.w_o.rows()));
    return ops::add_rowvec(ops::matmul(cat, p.w_o), p.b_o);
}

Tensor attention_single_batch(const SeqBatch& h, const AttentionParams& p) {
    return single_batch_ctx(h, p);
}

Tensor attention_multihead_batch(const SeqBatch& h, const MultiHeadParams& p) {
    if (p.heads.empty())
        throw ParameterError("attention_multihead_batch: no heads");
    std::vector<Tensor> outs;
    outs.reserve(p.heads.size());
    for (const auto& head : p.heads) outs.push_back(single_batch_ctx(h, head));
    Tensor cat = ops::concat_cols(outs);
    if (cat.cols() != p.w_o.rows())
        throw DimensionError("attention_multihead_batch: concat width " +
                             std::to_string(cat.cols()) +
                             " does not match w_o rows " +
                             std::to_string(p.w_o.rows()));
    return ops::add_rowvec(ops::matmul(cat, p.w_o), p.b_o);
}

} // namespace phishkit::layers
