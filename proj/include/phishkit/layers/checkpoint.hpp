#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phishkit/numerics/tensor.hpp"

namespace phishkit::layers {

using NamedTensors = std::vector<std::pair<std::string, numerics::Tensor>>;

// Single-archive checkpoint: per tensor a name, a shape header and raw
// 64-bit little-endian values. Round trips bitwise.
void save_checkpoint(const NamedTensors& tensors, const std::string& path);
NamedTensors load_checkpoint(const std::string& path);

} // namespace phishkit::layers
