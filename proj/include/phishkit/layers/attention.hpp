#pragma once

#include "phishkit/layers/common.hpp"

namespace phishkit::layers {

// Q/K/V projections for one head.
struct AttentionParams {
    Tensor w_q, w_k, w_v; // [model_dim x proj_dim]
    static AttentionParams init(std::size_t model_dim, std::size_t proj_dim,
                                Rng& rng);
    std::vector<std::pair<std::string, Tensor>> named(
        const std::string& prefix) const;
    std::size_t proj_dim() const { return w_q.cols(); }
};

struct MultiHeadParams {
    std::vector<AttentionParams> heads;
    Tensor w_o; // [(H*D) x out_dim]
    Tensor b_o; // [out_dim]
    static MultiHeadParams init(std::size_t model_dim, std::size_t n_heads,
                                std::size_t head_dim, std::size_t out_dim,
                                Rng& rng);
    std::vector<std::pair<std::string, Tensor>> named(
        const std::string& prefix) const;
};

struct AttentionOutput {
    Tensor seq;    // [T x proj]
    Tensor pooled; // [proj], mean over time rows
};

// softmax(Q K^T / sqrt(d_k)) V over a [T x m] sequence with row-wise
// softmax; the pooled context is the mean over time rows.
AttentionOutput attention_single(const Tensor& h, const AttentionParams& p);

// Per-head scaled dot-product, heads concatenated to [T x H*D] and projected
// by w_o/b_o to [T x out].
Tensor attention_multihead(const Tensor& h, const MultiHeadParams& p);

// Batched variants over batch-major [B*T x m] activations. Softmax is taken
// over unmasked key positions only; rows at [PAD] queries are left to the
// downstream masked pooling.
Tensor attention_single_batch(const SeqBatch& h, const AttentionParams& p);
Tensor attention_multihead_batch(const SeqBatch& h, const MultiHeadParams& p);

} // namespace phishkit::layers
