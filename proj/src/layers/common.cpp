#include "phishkit/layers/common.hpp"

#include <cmath>

#include "phishkit/error.hpp"

namespace phishkit::layers {

namespace ops = phishkit::numerics;

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    std::vector<double> v(fan_in * fan_out);
    for (auto& x : v) x = rng.uniform(-limit, limit);
    return Tensor::param(std::move(v), {fan_in, fan_out});
}

DenseParams DenseParams::init(std::size_t in, std::size_t out, Rng& rng) {
    return {xavier_uniform(in, out, rng),
            Tensor::param(std::vector<double>(out, 0.0), {out})};
}

Tensor dense(const Tensor& x, const DenseParams& p) {
    return ops::add_rowvec(ops::matmul(x, p.w), p.b);
}

Tensor dense_sigmoid(const Tensor& x, const Tensor& w, const Tensor& b) {
    Tensor in = x;
    bool flat = x.shape().size() == 1;
    if (flat) in = ops::reshape(x, {1, x.numel()});
    Tensor out = ops::sigmoid(ops::add_rowvec(ops::matmul(in, w), b));
    if (flat && out.numel() == 1) return ops::reshape(out, {1});
    return out;
}

Tensor global_average_pool(const Tensor& seq) {
    const std::size_t t = seq.rows();
    if (t == 0) throw ParameterError("global_average_pool: empty sequence");
    std::vector<double> mask(t, 1.0);
    Tensor pooled = masked_mean_pool(seq, 1, t, mask);
    return ops::reshape(pooled, {seq.cols()});
}

Tensor masked_mean_pool(const Tensor& x, std::size_t batch, std::size_t steps,
                        const std::vector<double>& mask) {
    if (x.rows() != batch * steps)
        throw DimensionError("masked_mean_pool: row count " +
                             std::to_string(x.rows()) + " != batch*steps");
    if (mask.size() != batch * steps)
        throw DimensionError("masked_mean_pool: mask size mismatch");
    // Constant pooling matrix: row b holds 1/len_b on sample b's valid rows.
    std::vector<double> pool(batch * batch * steps, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
        double len = 0.0;
        for (std::size_t t = 0; t < steps; ++t) len += mask[b * steps + t];
        if (len == 0.0) continue;
        for (std::size_t t = 0; t < steps; ++t) {
            pool[b * batch * steps + b * steps + t] = mask[b * steps + t] / len;
        }
    }
    Tensor p = Tensor::from(std::move(pool), {batch, batch * steps});
    return ops::matmul(p, x);
}

} // namespace phishkit::layers
