#pragma once

#include <cstdint>
#include <vector>

#include "phishkit/numerics/tensor.hpp"

namespace phishkit::numerics {

// All operations are differentiable w.r.t. their Tensor inputs unless noted.
// Every result is checked for NaN/Inf and a NumericError is thrown on the
// first non-finite value.

// --- linear algebra -------------------------------------------------------

// [m x k] * [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);
// [m x k] * [n x k]^T -> [m x n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// --- elementwise ----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// Broadcasts a [n] (or [1 x n]) row vector over every row of a [m x n] input.
Tensor add_rowvec(const Tensor& a, const Tensor& row);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

enum class Activation { Sigmoid, Tanh, Relu, Gelu };
Tensor activation(Activation kind, const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh_act(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor gelu(const Tensor& x);

// --- shape ops ------------------------------------------------------------

// Stacks inputs left-to-right: [m x n1], [m x n2] -> [m x (n1+n2)].
Tensor concat_cols(const std::vector<Tensor>& xs);
// Stacks inputs top-to-bottom: row counts add, column count shared.
Tensor concat_rows(const std::vector<Tensor>& xs);
// out row r = x row idx[r]; backward scatter-adds into x.
Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& idx);
// Contiguous row window [begin, begin+count).
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
Tensor reshape(const Tensor& x, Shape shape);

// --- reductions & softmax -------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Row-wise softmax of a [m x n] tensor; computed with per-row max
// subtraction. Optional additive mask (same shape, typically 0 / -1e30)
// applied before normalization.
Tensor row_softmax(const Tensor& x);
Tensor row_softmax_masked(const Tensor& x, const Tensor& mask);

// softmax(z / tau) for a vector (or single-row) input. tau must be > 0.
Tensor softmax_with_temperature(const Tensor& z, double tau);

// Row-wise layer normalization with learned gain/bias:
// out = gamma * (x - mu) / sqrt(var + eps) + beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);

// Inverted dropout. Train mode masks with probability `rate` and rescales by
// 1/(1-rate); eval mode is the identity. rate in [0, 1).
Tensor dropout(const Tensor& x, double rate, bool train, std::uint64_t seed);

// --- extension point --------------------------------------------------------

// Builds an operation node from a precomputed value. `backward` receives the
// produced node (for its forward value) and accumulates into parent buffers
// via tape.buffer_for(). Used by modules that define their own fused ops.
Tensor make_custom_op(
    const char* name, Shape out_shape, std::vector<double> value,
    std::vector<Tensor> parents,
    std::function<void(const detail::Node& self, const double* grad_out,
                       GradTape& tape)>
        backward);

// --- gradient verification ------------------------------------------------

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t worst_param = 0; // index into the params vector
    std::size_t worst_index = 0; // flat element index within that parameter
    std::size_t checked = 0;
};

// Central finite differences (f(t+eps) - f(t-eps)) / (2 eps) against the
// analytic gradient of f() for every element of every parameter. Relative
// error uses denominator max(|analytic|, |numeric|, 1e-3) so dead-zero
// gradients do not produce spurious failures. eps must lie in [1e-7, 1e-3].
GradCheckReport grad_check(const std::function<Tensor()>& f,
                           const std::vector<Tensor>& params, double eps);

} // namespace phishkit::numerics
