#pragma once

#include <array>
#include <vector>

#include "phishkit/numerics/ops.hpp"

namespace phishkit::training {

using numerics::Tensor;

// Hyperparameters of the distillation objective. The defaults are the
// published operating point: alpha 0.5, temperature 2.0, lr 1e-4, 3 epochs,
// batch 32.
struct DistillConfig {
    double alpha = 0.5;
    double tau = 2.0;
    double lr = 1e-4;
    std::size_t epochs = 3;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;

    void validate() const;
};

// -(1/N) sum[y log p + (1-y) log(1-p)] over probabilities clamped to
// [1e-12, 1-1e-12]. Differentiable w.r.t. preds.
Tensor bce_loss(const Tensor& preds, const std::vector<int>& labels);

// Mean softmax cross-entropy of [B x C] logits against integer labels.
Tensor softmax_xent(const Tensor& logits, const std::vector<int>& labels);

// Mean over the batch of KL(softmax(z_t/tau) || softmax(z_s/tau)). The
// teacher logits enter as data: gradients flow to z_s only.
Tensor kl_soft_loss(const Tensor& z_s,
                    const std::vector<std::array<double, 2>>& z_t, double tau);
// Convenience overload reading the teacher logits out of a [B x 2] tensor
// without connecting it to the graph.
Tensor kl_soft_loss(const Tensor& z_s, const Tensor& z_t, double tau);

struct LossBreakdown {
    Tensor l_hard;
    Tensor l_soft;
    Tensor l_distill; // alpha*hard + (1-alpha)*tau^2*soft
};

// Students emit one pre-sigmoid logit; it is lifted to the 2-logit view
// (0, z) so both the hard cross-entropy and the softened KL operate on class
// distributions. z_s is [B x 1] (lifted) or already [B x 2].
LossBreakdown distill_loss(const Tensor& z_s, const Tensor& z_t,
                           const std::vector<int>& labels,
                           const DistillConfig& cfg);

} // namespace phishkit::training
