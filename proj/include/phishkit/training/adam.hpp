#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "phishkit/numerics/tensor.hpp"

namespace phishkit::training {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::map<std::string, std::vector<double>> m;
    std::map<std::string, std::vector<double>> v;
    std::size_t t = 0;
};

// Standard Adam with bias correction over a named parameter map. Names in
// `frozen` are skipped entirely.
void adam_step(std::map<std::string, numerics::Tensor>& params,
               const numerics::GradMap& grads, AdamState& state,
               const AdamConfig& cfg,
               const std::set<std::string>& frozen = {});

} // namespace phishkit::training
