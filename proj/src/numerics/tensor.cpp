#include "phishkit/numerics/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace phishkit::numerics {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << " x ";
        os << s[i];
    }
    os << "]";
    return os.str();
}

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

namespace detail {

namespace {
std::atomic<std::uint64_t> g_next_id{1};
}

NodePtr make_node(Shape shape, std::vector<double> value) {
    if (shape_numel(shape) != value.size()) {
        throw DimensionError("tensor data length " + std::to_string(value.size()) +
                             " does not match shape " + shape_str(shape));
    }
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
    return n;
}

void check_finite(const std::vector<double>& v, const char* op) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string("non-finite value produced by ") + op);
        }
    }
}

} // namespace detail

Tensor Tensor::zeros(Shape shape) {
    std::size_t n = shape_numel(shape);
    return Tensor(detail::make_node(std::move(shape), std::vector<double>(n, 0.0)));
}

Tensor Tensor::full(Shape shape, double v) {
    if (!std::isfinite(v)) throw NumericError("Tensor::full with non-finite value");
    std::size_t n = shape_numel(shape);
    return Tensor(detail::make_node(std::move(shape), std::vector<double>(n, v)));
}

Tensor Tensor::scalar(double v) { return full({1}, v); }

Tensor Tensor::from(std::vector<double> data, Shape shape) {
    detail::check_finite(data, "Tensor::from");
    return Tensor(detail::make_node(std::move(shape), std::move(data)));
}

Tensor Tensor::param(std::vector<double> data, Shape shape) {
    Tensor t = from(std::move(data), std::move(shape));
    t.n_->requires_grad = true;
    t.n_->needs_grad = true;
    return t;
}

const detail::Node& Tensor::node() const {
    if (!n_) throw ContractError("use of an undefined Tensor");
    return *n_;
}

std::size_t Tensor::rows() const {
    const auto& s = shape();
    return s.empty() ? 1 : s[0];
}

std::size_t Tensor::cols() const {
    const auto& s = shape();
    if (s.size() < 2) return s.empty() ? 1 : (s.size() == 1 ? s[0] : 1);
    std::size_t c = 1;
    for (std::size_t i = 1; i < s.size(); ++i) c *= s[i];
    return c;
}

double Tensor::at(std::size_t i) const {
    if (i >= numel()) throw DimensionError("tensor index out of range");
    return node().value[i];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    std::size_t nc = cols();
    if (r >= rows() || c >= nc) throw DimensionError("tensor index out of range");
    return node().value[r * nc + c];
}

double Tensor::item() const {
    if (numel() != 1) {
        throw ContractError("item() on tensor of shape " + shape_str(shape()));
    }
    return node().value[0];
}

std::vector<double>& Tensor::mutable_data() {
    if (!n_) throw ContractError("use of an undefined Tensor");
    if (!n_->requires_grad && n_->backward) {
        throw ContractError("in-place mutation of a non-leaf tensor");
    }
    return n_->value;
}

Tensor GradMap::grad(const Tensor& param) const {
    auto it = grads_.find(param.id());
    if (it != grads_.end()) return it->second;
    return Tensor::zeros(param.shape());
}

bool GradMap::contains(const Tensor& t) const {
    return grads_.find(t.id()) != grads_.end();
}

GradTape::GradTape(const Tensor& scalar_loss) {
    if (scalar_loss.numel() != 1) {
        throw ContractError("backward requires a scalar loss, got shape " +
                            shape_str(scalar_loss.shape()));
    }
    const detail::NodePtr& root = scalar_loss.node_ptr();
    if (!root->needs_grad) return; // no parameters reachable

    // Iterative post-order DFS over grad-requiring parents; the reversed
    // post-order is the exact reverse topological order for the sweep.
    std::vector<detail::NodePtr> order;
    std::vector<std::pair<detail::NodePtr, std::size_t>> stack;
    std::unordered_map<const detail::Node*, bool> visited;
    stack.emplace_back(root, 0);
    visited[root.get()] = true;
    while (!stack.empty()) {
        detail::NodePtr node = stack.back().first;
        std::size_t next = stack.back().second;
        if (next < node->parents.size()) {
            stack.back().second = next + 1;
            const detail::NodePtr& p = node->parents[next];
            if (p->needs_grad && !visited[p.get()]) {
                visited[p.get()] = true;
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    buffers_[root.get()] = {1.0};
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const detail::NodePtr& node = *it;
        auto bit = buffers_.find(node.get());
        if (bit == buffers_.end()) continue; // no gradient flowed here
        if (node->backward) node->backward(*node, bit->second.data(), *this);
        if (node->requires_grad) {
            grads_.grads_.emplace(node->id,
                                  Tensor::from(bit->second, node->shape));
        }
    }
}

double* GradTape::buffer_for(const detail::NodePtr& parent) {
    if (!parent->needs_grad) return nullptr;
    auto it = buffers_.find(parent.get());
    if (it == buffers_.end()) {
        it = buffers_.emplace(parent.get(),
                              std::vector<double>(parent->value.size(), 0.0))
                 .first;
    }
    return it->second.data();
}

GradMap backward(const Tensor& loss) { return GradTape(loss).grads(); }

} // namespace phishkit::numerics
