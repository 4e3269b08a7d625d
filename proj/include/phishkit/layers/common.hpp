#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phishkit/numerics/ops.hpp"
#include "phishkit/numerics/rng.hpp"
#include "phishkit/numerics/tensor.hpp"

namespace phishkit::layers {

using numerics::Rng;
using numerics::Shape;
using numerics::Tensor;
using numerics::dropout;

// A padded batch of sequence activations, batch-major: row b*steps + t holds
// sample b at time t. mask is 1.0 on real tokens, 0.0 on [PAD] rows.
struct SeqBatch {
    Tensor data;
    std::size_t batch = 0;
    std::size_t steps = 0;
    std::vector<double> mask; // batch*steps entries

    std::size_t row(std::size_t b, std::size_t t) const { return b * steps + t; }
};

// Xavier-uniform weight, zero bias.
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

struct DenseParams {
    Tensor w; // [in x out]
    Tensor b; // [out]
    static DenseParams init(std::size_t in, std::size_t out, Rng& rng);
};

// x [B x in] -> [B x out]
Tensor dense(const Tensor& x, const DenseParams& p);

// sigmoid(x . w + b); accepts [m] (returns [1]) or [B x m] (returns [B x 1]).
Tensor dense_sigmoid(const Tensor& x, const Tensor& w, const Tensor& b);

// Column-wise mean over time rows of a [T x m] sequence -> [m].
Tensor global_average_pool(const Tensor& seq);

// Per-sample mean over valid time rows of a batch-major [B*T x m] tensor
// -> [B x m]. Samples with no valid rows yield zero rows.
Tensor masked_mean_pool(const Tensor& x, std::size_t batch, std::size_t steps,
                        const std::vector<double>& mask);

} // namespace phishkit::layers
