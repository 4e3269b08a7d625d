#include "phishkit/training/adam.hpp"

#include <cmath>

#include "phishkit/error.hpp"

namespace phishkit::training {

void adam_step(std::map<std::string, numerics::Tensor>& params,
               const numerics::GradMap& grads, AdamState& state,
               const AdamConfig& cfg, const std::set<std::string>& frozen) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, double(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, double(state.t));
    for (auto& [name, param] : params) {
        if (frozen.count(name)) continue;
        numerics::Tensor grad = grads.grad(param);
        if (grad.numel() != param.numel())
            throw ContractError("adam_step: gradient shape mismatch for " + name);
        auto& m = state.m[name];
        auto& v = state.v[name];
        if (m.empty()) m.assign(param.numel(), 0.0);
        if (v.empty()) v.assign(param.numel(), 0.0);
        auto& data = param.mutable_data();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double g = grad.at(i);
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

} // namespace phishkit::training
