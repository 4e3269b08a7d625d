#include "phishkit/layers/lstm.hpp"

#include "phishkit/error.hpp"

namespace phishkit::layers {

namespace ops = phishkit::numerics;

LstmParams LstmParams::init(std::size_t input, std::size_t hidden, Rng& rng) {
    LstmParams p;
    p.input_dim = input;
    p.hidden_dim = hidden;
    const std::size_t in = hidden + input;
    p.w_f = xavier_uniform(in, hidden, rng);
    p.w_i = xavier_uniform(in, hidden, rng);
    p.w_c = xavier_uniform(in, hidden, rng);
    p.w_o = xavier_uniform(in, hidden, rng);
    auto zero_bias = [&] {
        return Tensor::param(std::vector<double>(hidden, 0.0), {hidden});
    };
    p.b_f = zero_bias();
    p.b_i = zero_bias();
    p.b_c = zero_bias();
    p.b_o = zero_bias();
    return p;
}

std::vector<std::pair<std::string, Tensor>> LstmParams::named(
    const std::string& prefix) const {
    return {{prefix + ".w_f", w_f}, {prefix + ".w_i", w_i},
            {prefix + ".w_c", w_c}, {prefix + ".w_o", w_o},
            {prefix + ".b_f", b_f}, {prefix + ".b_i", b_i},
            {prefix + ".b_c", b_c}, {prefix + ".b_o", b_o}};
}

LstmState LstmState::zero(std::size_t batch, std::size_t hidden) {
    return {Tensor::zeros({batch, hidden}), Tensor::zeros({batch, hidden})};
}

LstmState lstm_cell_forward(const Tensor& x, const LstmState& prev,
                            const LstmParams& p) {
    Tensor xin = x;
    if (x.shape().size() == 1) xin = ops::reshape(x, {1, x.numel()});
    if (xin.cols() != p.input_dim || prev.h.cols() != p.hidden_dim)
        throw DimensionError("lstm_cell_forward: input " +
                             ops::shape_str(xin.shape()) + " / state " +
                             ops::shape_str(prev.h.shape()) +
                             " inconsistent with params (input=" +
                             std::to_string(p.input_dim) +
                             ", hidden=" + std::to_string(p.hidden_dim) + ")");
    Tensor hx = ops::concat_cols({prev.h, xin});
    Tensor f = ops::sigmoid(ops::add_rowvec(ops::matmul(hx, p.w_f), p.b_f));
    Tensor i = ops::sigmoid(ops::add_rowvec(ops::matmul(hx, p.w_i), p.b_i));
    Tensor cand = ops::tanh_act(ops::add_rowvec(ops::matmul(hx, p.w_c), p.b_c));
    Tensor o = ops::sigmoid(ops::add_rowvec(ops::matmul(hx, p.w_o), p.b_o));
    Tensor c_t = ops::add(ops::mul(f, prev.c), ops::mul(i, cand));
    Tensor h_t = ops::mul(o, ops::tanh_act(c_t));
    return {h_t, c_t};
}

Tensor lstm_forward(const Tensor& seq, const LstmParams& p) {
    const std::size_t steps = seq.rows();
    if (steps == 0) throw ParameterError("lstm_forward: empty sequence");
    LstmState state = LstmState::zero(1, p.hidden_dim);
    std::vector<Tensor> hs;
    hs.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        state = lstm_cell_forward(ops::slice_rows(seq, t, 1), state, p);
        hs.push_back(state.h);
    }
    return ops::concat_rows(hs);
}

Tensor bilstm_forward(const Tensor& seq, const LstmParams& fwd,
                      const LstmParams& bwd) {
    if (fwd.hidden_dim != bwd.hidden_dim)
        throw DimensionError("bilstm_forward: hidden sizes differ (" +
                             std::to_string(fwd.hidden_dim) + " vs " +
                             std::to_string(bwd.hidden_dim) + ")");
    const std::size_t steps = seq.rows();
    std::vector<std::size_t> rev(steps);
    for (std::size_t t = 0; t < steps; ++t) rev[t] = steps - 1 - t;
    Tensor fwd_out = lstm_forward(seq, fwd);
    Tensor bwd_out = lstm_forward(ops::gather_rows(seq, rev), bwd);
    return ops::concat_cols({fwd_out, ops::gather_rows(bwd_out, rev)});
}

LstmBatchOutput lstm_forward_batch(const SeqBatch& seq, const LstmParams& p,
                                   bool reverse) {
    const std::size_t batch = seq.batch, steps = seq.steps;
    if (steps == 0) throw ParameterError("lstm_forward_batch: empty sequence");
    const std::size_t hidden = p.hidden_dim;
    LstmState state = LstmState::zero(batch, hidden);
    std::vector<Tensor> hs(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t t = reverse ? steps - 1 - k : k;
        std::vector<std::size_t> rows(batch);
        for (std::size_t b = 0; b < batch; ++b) rows[b] = seq.row(b, t);
        Tensor x_t = ops::gather_rows(seq.data, rows);
        LstmState next = lstm_cell_forward(x_t, state, p);
        // [PAD] steps carry the previous state through unchanged.
        std::vector<double> m(batch * hidden), inv(batch * hidden);
        for (std::size_t b = 0; b < batch; ++b) {
            const double v = seq.mask[seq.row(b, t)];
            for (std::size_t j = 0; j < hidden; ++j) {
                m[b * hidden + j] = v;
                inv[b * hidden + j] = 1.0 - v;
            }
        }
        Tensor keep = Tensor::from(std::move(m), {batch, hidden});
        Tensor carry = Tensor::from(std::move(inv), {batch, hidden});
        state.h = ops::add(ops::mul(next.h, keep), ops::mul(state.h, carry));
        state.c = ops::add(ops::mul(next.c, keep), ops::mul(state.c, carry));
        hs[t] = state.h;
    }
    // hs is time-major; interleave back to batch-major rows b*steps + t.
    Tensor stacked = ops::concat_rows(hs); // [T*B x H], row t*B + b
    std::vector<std::size_t> perm(batch * steps);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < steps; ++t)
            perm[b * steps + t] = t * batch + b;
    return {ops::gather_rows(stacked, perm), state.h};
}

BilstmBatchOutput bilstm_forward_batch(const SeqBatch& seq,
                                       const LstmParams& fwd,
                                       const LstmParams& bwd) {
    if (fwd.hidden_dim != bwd.hidden_dim)
        throw DimensionError("bilstm_forward_batch: hidden sizes differ");
    LstmBatchOutput f = lstm_forward_batch(seq, fwd, false);
    LstmBatchOutput b = lstm_forward_batch(seq, bwd, true);
    return {ops::concat_cols({f.seq, b.seq}),
            ops::concat_cols({f.final, b.final})};
}

} // namespace phishkit::layers
