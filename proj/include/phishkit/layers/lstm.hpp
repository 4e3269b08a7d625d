#pragma once

#include "phishkit/layers/common.hpp"

namespace phishkit::layers {

// Gate parameters stored as four separate blocks so each gate can be tested
// one equation at a time. Weights act on the concatenation [h_{t-1}, x_t].
struct LstmParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    Tensor w_f, w_i, w_c, w_o; // [(hidden+input) x hidden]
    Tensor b_f, b_i, b_c, b_o; // [hidden]

    static LstmParams init(std::size_t input, std::size_t hidden, Rng& rng);
    std::vector<std::pair<std::string, Tensor>> named(
        const std::string& prefix) const;
};

struct LstmState {
    Tensor h; // hidden state
    Tensor c; // cell memory
    static LstmState zero(std::size_t batch, std::size_t hidden);
};

// One gated update: f,i,o = sigmoid(W [h,x] + b), cand = tanh(W_c [h,x] +
// b_c), c_t = f*c + i*cand, h_t = o * tanh(c_t). x is [B x input] (or
// [input] for a single sample).
LstmState lstm_cell_forward(const Tensor& x, const LstmState& prev,
                            const LstmParams& p);

// Left-to-right scan from the zero state over a [T x input] sequence;
// returns all T hidden states.
Tensor lstm_forward(const Tensor& seq, const LstmParams& p);

// Forward and reversed scans concatenated per step: [T x 2*hidden].
Tensor bilstm_forward(const Tensor& seq, const LstmParams& fwd,
                      const LstmParams& bwd);

struct LstmBatchOutput {
    Tensor seq;   // [B*T x hidden] batch-major hidden states
    Tensor final; // [B x hidden] state at each sample's last valid token
};

// Batched scan with masked state carry: [PAD] steps keep the previous
// state, so `final` is the state at the last real token even under padding.
LstmBatchOutput lstm_forward_batch(const SeqBatch& seq, const LstmParams& p,
                                   bool reverse);

struct BilstmBatchOutput {
    Tensor seq;   // [B*T x 2*hidden]
    Tensor final; // [B x 2*hidden], forward-final ++ backward-final
};

BilstmBatchOutput bilstm_forward_batch(const SeqBatch& seq,
                                       const LstmParams& fwd,
                                       const LstmParams& bwd);

} // namespace phishkit::layers
