#include "phishkit/training/loss.hpp"

#include <cmath>

#include "phishkit/error.hpp"

namespace phishkit::training {

namespace ops = phishkit::numerics;

void DistillConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0)
        throw ParameterError("distill alpha must lie in [0, 1], got " +
                             std::to_string(alpha));
    if (!(tau > 0.0))
        throw ParameterError("distill tau must be positive, got " +
                             std::to_string(tau));
    if (!(lr > 0.0)) throw ParameterError("distill lr must be positive");
    if (batch_size < 1) throw ParameterError("distill batch_size must be >= 1");
}

Tensor bce_loss(const Tensor& preds, const std::vector<int>& labels) {
    if (preds.numel() != labels.size())
        throw ContractError("bce_loss: " + std::to_string(preds.numel()) +
                            " predictions vs " + std::to_string(labels.size()) +
                            " labels");
    if (labels.empty()) throw ParameterError("bce_loss: empty batch");
    const double n = double(labels.size());
    constexpr double kClamp = 1e-12;
    double total = 0.0;
    std::vector<double> clamped(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double p = std::min(std::max(preds.at(i), kClamp), 1.0 - kClamp);
        clamped[i] = p;
        total += labels[i] ? std::log(p) : std::log(1.0 - p);
    }
    auto y = labels;
    auto ps = std::make_shared<std::vector<double>>(std::move(clamped));
    return ops::make_custom_op(
        "bce_loss", {1}, {-total / n}, {preds},
        [y, ps, n](const ops::detail::Node& self, const double* g,
                   ops::GradTape& tape) {
            (void)self;
            if (double* gp = tape.buffer_for(self.parents[0])) {
                for (std::size_t i = 0; i < y.size(); ++i) {
                    const double p = (*ps)[i];
                    const double d =
                        y[i] ? -1.0 / p : 1.0 / (1.0 - p);
                    gp[i] += g[0] * d / n;
                }
            }
        });
}

namespace {

// Row-wise stable log-softmax into `logp`; returns nothing extra.
void log_softmax_rows(const std::vector<double>& z, std::size_t rows,
                      std::size_t cols, std::vector<double>& logp) {
    logp.resize(z.size());
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = z.data() + i * cols;
        double mx = row[0];
        for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, row[j]);
        double total = 0.0;
        for (std::size_t j = 0; j < cols; ++j) total += std::exp(row[j] - mx);
        const double lse = mx + std::log(total);
        for (std::size_t j = 0; j < cols; ++j) logp[i * cols + j] = row[j] - lse;
    }
}

} // namespace

Tensor softmax_xent(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t rows = logits.rows();
    const std::size_t cols = logits.cols();
    if (rows != labels.size())
        throw ContractError("softmax_xent: batch size mismatch");
    if (labels.empty()) throw ParameterError("softmax_xent: empty batch");
    std::vector<double> logp;
    log_softmax_rows(logits.data(), rows, cols, logp);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const int y = labels[i];
        if (y < 0 || std::size_t(y) >= cols)
            throw ContractError("softmax_xent: label out of range");
        total -= logp[i * cols + y];
    }
    const double n = double(rows);
    auto y = labels;
    auto lp = std::make_shared<std::vector<double>>(std::move(logp));
    return ops::make_custom_op(
        "softmax_xent", {1}, {total / n}, {logits},
        [y, lp, rows, cols, n](const ops::detail::Node& self, const double* g,
                               ops::GradTape& tape) {
            if (double* gz = tape.buffer_for(self.parents[0])) {
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j) {
                        const double soft = std::exp((*lp)[i * cols + j]);
                        const double onehot = (std::size_t(y[i]) == j) ? 1.0 : 0.0;
                        gz[i * cols + j] += g[0] * (soft - onehot) / n;
                    }
            }
        });
}

Tensor kl_soft_loss(const Tensor& z_s,
                    const std::vector<std::array<double, 2>>& z_t, double tau) {
    if (!(tau > 0.0)) throw ParameterError("kl_soft_loss: tau must be positive");
    const std::size_t rows = z_s.rows();
    const std::size_t cols = z_s.cols();
    if (rows != z_t.size())
        throw ContractError("kl_soft_loss: batch size mismatch");
    if (cols != 2)
        throw ContractError("kl_soft_loss: expected 2-class logits, got " +
                            numerics::shape_str(z_s.shape()));
    // softened teacher distribution (data only, no graph edge)
    std::vector<double> p_t(rows * 2);
    for (std::size_t i = 0; i < rows; ++i) {
        const double a = z_t[i][0] / tau, b = z_t[i][1] / tau;
        const double mx = std::max(a, b);
        const double ea = std::exp(a - mx), eb = std::exp(b - mx);
        p_t[i * 2] = ea / (ea + eb);
        p_t[i * 2 + 1] = eb / (ea + eb);
    }
    std::vector<double> logq;
    std::vector<double> scaled(rows * 2);
    for (std::size_t i = 0; i < rows * 2; ++i) scaled[i] = z_s.at(i) / tau;
    log_softmax_rows(scaled, rows, 2, logq);
    double total = 0.0;
    for (std::size_t i = 0; i < rows * 2; ++i) {
        if (p_t[i] > 0.0) total += p_t[i] * (std::log(p_t[i]) - logq[i]);
    }
    const double n = double(rows);
    auto pt = std::make_shared<std::vector<double>>(std::move(p_t));
    auto lq = std::make_shared<std::vector<double>>(std::move(logq));
    return ops::make_custom_op(
        "kl_soft_loss", {1}, {total / n}, {z_s},
        [pt, lq, rows, tau, n](const ops::detail::Node& self, const double* g,
                               ops::GradTape& tape) {
            if (double* gz = tape.buffer_for(self.parents[0])) {
                for (std::size_t i = 0; i < rows * 2; ++i) {
                    const double q = std::exp((*lq)[i]);
                    gz[i] += g[0] * (q - (*pt)[i]) / (tau * n);
                }
            }
        });
}

Tensor kl_soft_loss(const Tensor& z_s, const Tensor& z_t, double tau) {
    if (z_t.cols() != 2 || z_t.rows() != z_s.rows())
        throw ContractError("kl_soft_loss: teacher logits must be [B x 2]");
    std::vector<std::array<double, 2>> data(z_t.rows());
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = {z_t.at(i, 0), z_t.at(i, 1)};
    return kl_soft_loss(z_s, data, tau);
}

LossBreakdown distill_loss(const Tensor& z_s, const Tensor& z_t,
                           const std::vector<int>& labels,
                           const DistillConfig& cfg) {
    cfg.validate();
    Tensor two_logit = z_s;
    if (z_s.cols() == 1) {
        two_logit = ops::concat_cols({Tensor::zeros({z_s.rows(), 1}), z_s});
    } else if (z_s.cols() != 2) {
        throw ContractError("distill_loss: student logits must be [B x 1] or "
                            "[B x 2]");
    }
    LossBreakdown out;
    out.l_hard = softmax_xent(two_logit, labels);
    out.l_soft = kl_soft_loss(two_logit, z_t, cfg.tau);
    out.l_distill =
        ops::add(ops::scale(out.l_hard, cfg.alpha),
                 ops::scale(out.l_soft, (1.0 - cfg.alpha) * cfg.tau * cfg.tau));
    return out;
}

} // namespace phishkit::training
