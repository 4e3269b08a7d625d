#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "phishkit/error.hpp"

namespace phishkit::numerics {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);

class GradTape;

namespace detail {

struct Node {
    std::vector<double> value;
    Shape shape;
    std::uint64_t id = 0;
    bool requires_grad = false; // leaf parameter
    bool needs_grad = false;    // on a path from a parameter
    std::vector<std::shared_ptr<Node>> parents;
    // Accumulates d(loss)/d(parents) given d(loss)/d(this). `self` is the
    // node being differentiated (its forward value is often reused). Null for
    // leaves and constants.
    std::function<void(const Node& self, const double* grad_out, GradTape& tape)>
        backward;
};

using NodePtr = std::shared_ptr<Node>;

NodePtr make_node(Shape shape, std::vector<double> value);
void check_finite(const std::vector<double>& v, const char* op);

} // namespace detail

// Dense row-major tensor of 64-bit floats. A Tensor is a cheap value handle:
// results of operations are immutable once produced; only leaf parameters may
// be updated in place (via mutable_data) between training steps.
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double v);
    static Tensor scalar(double v);
    static Tensor from(std::vector<double> data, Shape shape);
    // Leaf parameter: participates in gradient computation.
    static Tensor param(std::vector<double> data, Shape shape);

    bool defined() const { return static_cast<bool>(n_); }
    const Shape& shape() const { return node().shape; }
    std::size_t numel() const { return node().value.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    const std::vector<double>& data() const { return node().value; }
    double at(std::size_t i) const;
    double at(std::size_t r, std::size_t c) const;
    // Value of a single-element tensor.
    double item() const;

    bool requires_grad() const { return node().requires_grad; }
    std::uint64_t id() const { return node().id; }

    // In-place access for leaf updates (optimizer steps, embedding transfer).
    // Calling this on a non-leaf tensor is a contract violation.
    std::vector<double>& mutable_data();

    // Internal: used by operation implementations.
    const detail::NodePtr& node_ptr() const { return n_; }
    explicit Tensor(detail::NodePtr n) : n_(std::move(n)) {}

  private:
    const detail::Node& node() const;
    detail::NodePtr n_;
};

// Gradient map produced by backward(): tensor id -> gradient. Parameters not
// reached by the backward sweep report a zero gradient of matching shape.
class GradMap {
  public:
    Tensor grad(const Tensor& param) const;
    bool contains(const Tensor& t) const;
    std::size_t reached_count() const { return grads_.size(); }

  private:
    friend class GradTape;
    std::unordered_map<std::uint64_t, Tensor> grads_;
};

// Reverse-mode sweep over the recorded operation graph. Construction walks
// the graph from a scalar loss in exact reverse topological order and
// accumulates gradients for every reachable node that needs one.
class GradTape {
  public:
    explicit GradTape(const Tensor& scalar_loss);

    // Gradient of the loss w.r.t. t (zeros of t's shape when unreachable).
    Tensor grad(const Tensor& t) const { return grads_.grad(t); }
    const GradMap& grads() const { return grads_; }

    // Used by op backward closures to add a contribution for `parent`.
    double* buffer_for(const detail::NodePtr& parent);

  private:
    std::unordered_map<const detail::Node*, std::vector<double>> buffers_;
    GradMap grads_;
};

// Convenience wrapper matching the "backward(tape, loss)" contract: runs a
// full reverse sweep from `loss` and returns the gradient map.
GradMap backward(const Tensor& loss);

} // namespace phishkit::numerics
