#include "phishkit/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "phishkit/numerics/rng.hpp"

namespace phishkit::numerics {

namespace {

using detail::Node;
using detail::NodePtr;

// Raw accumulating matmul kernels (row-major).
void mm_nn_acc(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ar = a + i * k;
        double* cr = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = ar[l];
            const double* br = b + l * n;
            for (std::size_t j = 0; j < n; ++j) cr[j] += av * br[j];
        }
    }
}

// a [m x k] * b [n x k]^T -> c [m x n]
void mm_nt_acc(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ar = a + i * k;
        double* cr = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* br = b + j * k;
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += ar[l] * br[l];
            cr[j] += s;
        }
    }
}

// a [m x k]^T * b [m x n] -> c [k x n]
void mm_tn_acc(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n) {
    for (std::size_t l = 0; l < m; ++l) {
        const double* ar = a + l * k;
        const double* br = b + l * n;
        for (std::size_t i = 0; i < k; ++i) {
            const double av = ar[i];
            if (av == 0.0) continue;
            double* cr = c + i * n;
            for (std::size_t j = 0; j < n; ++j) cr[j] += av * br[j];
        }
    }
}

Tensor finish(NodePtr n, const char* op, std::vector<NodePtr> parents,
              std::function<void(const Node&, const double*, GradTape&)> bwd) {
    detail::check_finite(n->value, op);
    bool needs = false;
    for (const auto& p : parents) needs = needs || p->needs_grad;
    if (needs) {
        n->needs_grad = true;
        n->parents = std::move(parents);
        n->backward = std::move(bwd);
    }
    return Tensor(std::move(n));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " +
                             shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
}

struct Dims2 {
    std::size_t r, c;
};

Dims2 as2d(const Tensor& t, const char* op) {
    const Shape& s = t.shape();
    if (s.size() == 1) return {1, s[0]};
    if (s.size() == 2) return {s[0], s[1]};
    throw DimensionError(std::string(op) + ": expected rank 1 or 2, got " +
                         shape_str(s));
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    auto da = as2d(a, "matmul");
    auto db = as2d(b, "matmul");
    if (da.c != db.r) {
        throw DimensionError("matmul: inner dimensions differ, " +
                             shape_str(a.shape()) + " x " + shape_str(b.shape()));
    }
    const std::size_t m = da.r, k = da.c, n = db.c;
    auto out = detail::make_node({m, n}, std::vector<double>(m * n, 0.0));
    mm_nn_acc(a.data().data(), b.data().data(), out->value.data(), m, k, n);
    NodePtr pa = a.node_ptr(), pb = b.node_ptr();
    return finish(std::move(out), "matmul", {pa, pb},
                  [pa, pb, m, k, n](const Node&, const double* g, GradTape& tape) {
                      if (double* ga = tape.buffer_for(pa))
                          mm_nt_acc(g, pb->value.data(), ga, m, n, k);
                      if (double* gb = tape.buffer_for(pb))
                          mm_tn_acc(pa->value.data(), g, gb, m, k, n);
                  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    auto da = as2d(a, "matmul_nt");
    auto db = as2d(b, "matmul_nt");
    if (da.c != db.c) {
        throw DimensionError("matmul_nt: inner dimensions differ, " +
                             shape_str(a.shape()) + " x " + shape_str(b.shape()) +
                             "^T");
    }
    const std::size_t m = da.r, k = da.c, n = db.r;
    auto out = detail::make_node({m, n}, std::vector<double>(m * n, 0.0));
    mm_nt_acc(a.data().data(), b.data().data(), out->value.data(), m, k, n);
    NodePtr pa = a.node_ptr(), pb = b.node_ptr();
    // out = A B^T: dA = G B, dB = G^T A.
    return finish(std::move(out), "matmul_nt", {pa, pb},
                  [pa, pb, m, k, n](const Node&, const double* g, GradTape& tape) {
                      if (double* ga = tape.buffer_for(pa))
                          mm_nn_acc(g, pb->value.data(), ga, m, n, k);
                      if (double* gb = tape.buffer_for(pb))
                          mm_tn_acc(g, pa->value.data(), gb, m, n, k);
                  });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> v(a.numel());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] + b.data()[i];
    auto out = detail::make_node(a.shape(), std::move(v));
    NodePtr pa = a.node_ptr(), pb = b.node_ptr();
    std::size_t n = a.numel();
    return finish(std::move(out), "add", {pa, pb},
                  [pa, pb, n](const Node&, const double* g, GradTape& tape) {
                      if (double* ga = tape.buffer_for(pa))
                          for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
                      if (double* gb = tape.buffer_for(pb))
                          for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
                  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> v(a.numel());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] - b.data()[i];
    auto out = detail::make_node(a.shape(), std::move(v));
    NodePtr pa = a.node_ptr(), pb = b.node_ptr();
    std::size_t n = a.numel();
    return finish(std::move(out), "sub", {pa, pb},
                  [pa, pb, n](const Node&, const double* g, GradTape& tape) {
                      if (double* ga = tape.buffer_for(pa))
                          for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
                      if (double* gb = tape.buffer_for(pb))
                          for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
                  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> v(a.numel());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * b.data()[i];
    auto out = detail::make_node(a.shape(), std::move(v));
    NodePtr pa = a.node_ptr(), pb = b.node_ptr();
    std::size_t n = a.numel();
    return finish(std::move(out), "mul", {pa, pb},
                  [pa, pb, n](const Node&, const double* g, GradTape& tape) {
                      if (double* ga = tape.buffer_for(pa))
                          for (std::size_t i = 0; i < n; ++i)
                              ga[i] += g[i] * pb->value[i];
                      if (double* gb = tape.buffer_for(pb))
                          for (std::size_t i = 0; i < n; ++i)
                              gb[i] += g[i] * pa->value[i];
                  });
}

Tensor add_rowvec(const Tensor& a, const Tensor& row) {
    auto da = as2d(a, "add_rowvec");
    if (row.numel() != da.c) {
        throw DimensionError("add_rowvec: row length " + shape_str(row.shape()) +
                             " does not match columns of " + shape_str(a.shape()));
    }
    std::vector<double> v(a.numel());
    for (std::size_t i = 0; i < da.r; ++i)
        for (std::size_t j = 0; j < da.c; ++j)
            v[i * da.c + j] = a.data()[i * da.c + j] + row.data()[j];
    auto out = detail::make_node(a.shape(), std::move(v));
    NodePtr pa = a.node_ptr(), pr = row.node_ptr();
    std::size_t m = da.r, n = da.c;
    return finish(std::move(out), "add_rowvec", {pa, pr},
                  [pa, pr, m, n](const Node&, const double* g, GradTape& tape) {
                      if (double* ga = tape.buffer_for(pa))
                          for (std::size_t i = 0; i < m * n; ++i) ga[i] += g[i];
                      if (double* gr = tape.buffer_for(pr))
                          for (std::size_t i = 0; i < m; ++i)
                              for (std::size_t j = 0; j < n; ++j)
                                  gr[j] += g[i * n + j];
                  });
}

Tensor scale(const Tensor& a, double s) {
    if (!std::isfinite(s)) throw NumericError("scale by non-finite factor");
    std::vector<double> v(a.numel());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * s;
    auto out = detail::make_node(a.shape(), std::move(v));
    NodePtr pa = a.node_ptr();
    std::size_t n = a.numel();
    return finish(std::move(out), "scale", {pa},
                  [pa, n, s](const Node&, const double* g, GradTape& tape) {
                      if (double* ga = tape.buffer_for(pa))
                          for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * s;
                  });
}

Tensor add_scalar(const Tensor& a, double s) {
    if (!std::isfinite(s)) throw NumericError("add_scalar with non-finite value");
    std::vector<double> v(a.numel());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] + s;
    auto out = detail::make_node(a.shape(), std::move(v));
    NodePtr pa = a.node_ptr();
    std::size_t n = a.numel();
    return finish(std::move(out), "add_scalar", {pa},
                  [pa, n](const Node&, const double* g, GradTape& tape) {
                      if (double* ga = tape.buffer_for(pa))
                          for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
                  });
}

namespace {

double sigmoid1(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

} // namespace

Tensor activation(Activation kind, const Tensor& x) {
    std::vector<double> v(x.numel());
    const auto& in = x.data();
    switch (kind) {
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = sigmoid1(in[i]);
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(in[i]);
            break;
        case Activation::Relu:
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = in[i] > 0.0 ? in[i] : 0.0;
            break;
        case Activation::Gelu:
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] = 0.5 * in[i] * (1.0 + std::erf(in[i] * kInvSqrt2));
            break;
    }
    auto out = detail::make_node(x.shape(), std::move(v));
    NodePtr px = x.node_ptr();
    std::size_t n = x.numel();
    return finish(std::move(out), "activation", {px},
                  [px, n, kind](const Node& self, const double* g, GradTape& tape) {
                      double* gx = tape.buffer_for(px);
                      if (!gx) return;
                      const auto& y = self.value;
                      const auto& xin = px->value;
                      switch (kind) {
                          case Activation::Sigmoid:
                              for (std::size_t i = 0; i < n; ++i)
                                  gx[i] += g[i] * y[i] * (1.0 - y[i]);
                              break;
                          case Activation::Tanh:
                              for (std::size_t i = 0; i < n; ++i)
                                  gx[i] += g[i] * (1.0 - y[i] * y[i]);
                              break;
                          case Activation::Relu:
                              for (std::size_t i = 0; i < n; ++i)
                                  gx[i] += xin[i] > 0.0 ? g[i] : 0.0;
                              break;
                          case Activation::Gelu:
                              for (std::size_t i = 0; i < n; ++i) {
                                  const double xi = xin[i];
                                  const double cdf =
                                      0.5 * (1.0 + std::erf(xi * kInvSqrt2));
                                  const double pdf =
                                      kInvSqrt2Pi * std::exp(-0.5 * xi * xi);
                                  gx[i] += g[i] * (cdf + xi * pdf);
                              }
                              break;
                      }
                  });
}

Tensor sigmoid(const Tensor& x) { return activation(Activation::Sigmoid, x); }
Tensor tanh_act(const Tensor& x) { return activation(Activation::Tanh, x); }
Tensor relu(const Tensor& x) { return activation(Activation::Relu, x); }
Tensor gelu(const Tensor& x) { return activation(Activation::Gelu, x); }

Tensor concat_cols(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw ParameterError("concat_cols: empty input list");
    std::size_t m = as2d(xs[0], "concat_cols").r;
    std::size_t total = 0;
    std::vector<std::size_t> widths;
    for (const auto& x : xs) {
        auto d = as2d(x, "concat_cols");
        if (d.r != m)
            throw DimensionError("concat_cols: row count mismatch " +
                                 shape_str(xs[0].shape()) + " vs " +
                                 shape_str(x.shape()));
        widths.push_back(d.c);
        total += d.c;
    }
    std::vector<double> v(m * total);
    std::size_t off = 0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
        const auto& src = xs[t].data();
        for (std::size_t i = 0; i < m; ++i)
            std::memcpy(v.data() + i * total + off, src.data() + i * widths[t],
                        widths[t] * sizeof(double));
        off += widths[t];
    }
    auto out = detail::make_node({m, total}, std::move(v));
    std::vector<NodePtr> parents;
    for (const auto& x : xs) parents.push_back(x.node_ptr());
    return finish(std::move(out), "concat_cols", parents,
                  [parents, widths, m, total](const Node&, const double* g, GradTape& tape) {
                      std::size_t off = 0;
                      for (std::size_t t = 0; t < parents.size(); ++t) {
                          if (double* gp = tape.buffer_for(parents[t])) {
                              for (std::size_t i = 0; i < m; ++i)
                                  for (std::size_t j = 0; j < widths[t]; ++j)
                                      gp[i * widths[t] + j] +=
                                          g[i * total + off + j];
                          }
                          off += widths[t];
                      }
                  });
}

Tensor concat_rows(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw ParameterError("concat_rows: empty input list");
    std::size_t c = as2d(xs[0], "concat_rows").c;
    std::size_t total_rows = 0;
    std::vector<std::size_t> heights;
    for (const auto& x : xs) {
        auto d = as2d(x, "concat_rows");
        if (d.c != c)
            throw DimensionError("concat_rows: column count mismatch " +
                                 shape_str(xs[0].shape()) + " vs " +
                                 shape_str(x.shape()));
        heights.push_back(d.r);
        total_rows += d.r;
    }
    std::vector<double> v;
    v.reserve(total_rows * c);
    for (const auto& x : xs) v.insert(v.end(), x.data().begin(), x.data().end());
    auto out = detail::make_node({total_rows, c}, std::move(v));
    std::vector<NodePtr> parents;
    for (const auto& x : xs) parents.push_back(x.node_ptr());
    return finish(std::move(out), "concat_rows", parents,
                  [parents, heights, c](const Node&, const double* g, GradTape& tape) {
                      std::size_t off = 0;
                      for (std::size_t t = 0; t < parents.size(); ++t) {
                          const std::size_t n = heights[t] * c;
                          if (double* gp = tape.buffer_for(parents[t]))
                              for (std::size_t i = 0; i < n; ++i)
                                  gp[i] += g[off + i];
                          off += n;
                      }
                  });
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& idx) {
    auto d = as2d(x, "gather_rows");
    for (std::size_t r : idx) {
        if (r >= d.r)
            throw DimensionError("gather_rows: row index " + std::to_string(r) +
                                 " out of range for " + shape_str(x.shape()));
    }
    std::vector<double> v(idx.size() * d.c);
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::memcpy(v.data() + i * d.c, x.data().data() + idx[i] * d.c,
                    d.c * sizeof(double));
    auto out = detail::make_node({idx.size(), d.c}, std::move(v));
    NodePtr px = x.node_ptr();
    std::size_t c = d.c;
    auto indices = idx;
    return finish(std::move(out), "gather_rows", {px},
                  [px, indices, c](const Node&, const double* g, GradTape& tape) {
                      double* gx = tape.buffer_for(px);
                      if (!gx) return;
                      for (std::size_t i = 0; i < indices.size(); ++i) {
                          double* dst = gx + indices[i] * c;
                          const double* src = g + i * c;
                          for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
                      }
                  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
    auto d = as2d(x, "slice_rows");
    if (begin + count > d.r)
        throw DimensionError("slice_rows: window [" + std::to_string(begin) +
                             ", " + std::to_string(begin + count) +
                             ") out of range for " + shape_str(x.shape()));
    std::vector<double> v(x.data().begin() + begin * d.c,
                          x.data().begin() + (begin + count) * d.c);
    auto out = detail::make_node({count, d.c}, std::move(v));
    NodePtr px = x.node_ptr();
    std::size_t c = d.c;
    return finish(std::move(out), "slice_rows", {px},
                  [px, begin, count, c](const Node&, const double* g, GradTape& tape) {
                      if (double* gx = tape.buffer_for(px))
                          for (std::size_t i = 0; i < count * c; ++i)
                              gx[begin * c + i] += g[i];
                  });
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel())
        throw DimensionError("reshape: cannot view " + shape_str(x.shape()) +
                             " as " + shape_str(shape));
    auto out = detail::make_node(std::move(shape), x.data());
    NodePtr px = x.node_ptr();
    std::size_t n = x.numel();
    return finish(std::move(out), "reshape", {px},
                  [px, n](const Node&, const double* g, GradTape& tape) {
                      if (double* gx = tape.buffer_for(px))
                          for (std::size_t i = 0; i < n; ++i) gx[i] += g[i];
                  });
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    auto out = detail::make_node({1}, {s});
    NodePtr px = x.node_ptr();
    std::size_t n = x.numel();
    return finish(std::move(out), "sum", {px},
                  [px, n](const Node&, const double* g, GradTape& tape) {
                      if (double* gx = tape.buffer_for(px))
                          for (std::size_t i = 0; i < n; ++i) gx[i] += g[0];
                  });
}

Tensor mean(const Tensor& x) {
    if (x.numel() == 0) throw ParameterError("mean of empty tensor");
    double s = 0.0;
    for (double v : x.data()) s += v;
    const double inv = 1.0 / static_cast<double>(x.numel());
    auto out = detail::make_node({1}, {s * inv});
    NodePtr px = x.node_ptr();
    std::size_t n = x.numel();
    return finish(std::move(out), "mean", {px},
                  [px, n, inv](const Node&, const double* g, GradTape& tape) {
                      if (double* gx = tape.buffer_for(px))
                          for (std::size_t i = 0; i < n; ++i) gx[i] += g[0] * inv;
                  });
}

namespace {

// Shared forward/backward for (optionally masked, optionally tempered)
// row-wise softmax.
Tensor softmax_impl(const Tensor& x, const Tensor* mask, double inv_tau,
                    const char* op) {
    auto d = as2d(x, op);
    if (d.c == 0) throw ParameterError(std::string(op) + ": empty input");
    std::vector<double> v(x.numel());
    const auto& in = x.data();
    const double* mk = mask ? mask->data().data() : nullptr;
    for (std::size_t i = 0; i < d.r; ++i) {
        const double* row = in.data() + i * d.c;
        const double* mrow = mk ? mk + i * d.c : nullptr;
        double mx = -HUGE_VAL;
        for (std::size_t j = 0; j < d.c; ++j) {
            const double z = row[j] * inv_tau + (mrow ? mrow[j] : 0.0);
            mx = std::max(mx, z);
        }
        double total = 0.0;
        double* orow = v.data() + i * d.c;
        for (std::size_t j = 0; j < d.c; ++j) {
            const double z = row[j] * inv_tau + (mrow ? mrow[j] : 0.0);
            orow[j] = std::exp(z - mx);
            total += orow[j];
        }
        for (std::size_t j = 0; j < d.c; ++j) orow[j] /= total;
    }
    auto out = detail::make_node(x.shape(), std::move(v));
    NodePtr px = x.node_ptr();
    std::size_t r = d.r, c = d.c;
    return finish(std::move(out), op, {px},
                  [px, r, c, inv_tau](const Node& self, const double* g, GradTape& tape) {
                      double* gx = tape.buffer_for(px);
                      if (!gx) return;
                      const auto& s = self.value;
                      for (std::size_t i = 0; i < r; ++i) {
                          const double* srow = s.data() + i * c;
                          const double* grow = g + i * c;
                          double dot = 0.0;
                          for (std::size_t j = 0; j < c; ++j)
                              dot += grow[j] * srow[j];
                          double* gxr = gx + i * c;
                          for (std::size_t j = 0; j < c; ++j)
                              gxr[j] += inv_tau * srow[j] * (grow[j] - dot);
                      }
                  });
}

} // namespace

Tensor row_softmax(const Tensor& x) { return softmax_impl(x, nullptr, 1.0, "row_softmax"); }

Tensor row_softmax_masked(const Tensor& x, const Tensor& mask) {
    require_same_shape(x, mask, "row_softmax_masked");
    return softmax_impl(x, &mask, 1.0, "row_softmax_masked");
}

Tensor softmax_with_temperature(const Tensor& z, double tau) {
    if (!(tau > 0.0))
        throw ParameterError("softmax temperature must be positive, got " +
                             std::to_string(tau));
    if (z.numel() == 0)
        throw ParameterError("softmax_with_temperature: empty input");
    return softmax_impl(z, nullptr, 1.0 / tau, "softmax_with_temperature");
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps) {
    auto d = as2d(x, "layer_norm");
    if (gamma.numel() != d.c || beta.numel() != d.c)
        throw DimensionError("layer_norm: gain/bias of shapes " +
                             shape_str(gamma.shape()) + "/" +
                             shape_str(beta.shape()) + " do not match " +
                             shape_str(x.shape()));
    std::vector<double> v(x.numel());
    std::vector<double> xhat(x.numel());
    std::vector<double> inv_std(d.r);
    const auto& in = x.data();
    for (std::size_t i = 0; i < d.r; ++i) {
        const double* row = in.data() + i * d.c;
        double mu = 0.0;
        for (std::size_t j = 0; j < d.c; ++j) mu += row[j];
        mu /= static_cast<double>(d.c);
        double var = 0.0;
        for (std::size_t j = 0; j < d.c; ++j) {
            const double dx = row[j] - mu;
            var += dx * dx;
        }
        var /= static_cast<double>(d.c);
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_std[i] = inv;
        for (std::size_t j = 0; j < d.c; ++j) {
            const double h = (row[j] - mu) * inv;
            xhat[i * d.c + j] = h;
            v[i * d.c + j] = gamma.data()[j] * h + beta.data()[j];
        }
    }
    auto out = detail::make_node(x.shape(), std::move(v));
    NodePtr px = x.node_ptr(), pg = gamma.node_ptr(), pb = beta.node_ptr();
    std::size_t r = d.r, c = d.c;
    auto xh = std::make_shared<std::vector<double>>(std::move(xhat));
    auto istd = std::make_shared<std::vector<double>>(std::move(inv_std));
    return finish(
        std::move(out), "layer_norm", {px, pg, pb},
        [px, pg, pb, r, c, xh, istd](const Node&, const double* g, GradTape& tape) {
            double* gx = tape.buffer_for(px);
            double* gg = tape.buffer_for(pg);
            double* gb = tape.buffer_for(pb);
            const double cn = static_cast<double>(c);
            for (std::size_t i = 0; i < r; ++i) {
                const double* grow = g + i * c;
                const double* hrow = xh->data() + i * c;
                if (gg || gb) {
                    for (std::size_t j = 0; j < c; ++j) {
                        if (gg) gg[j] += grow[j] * hrow[j];
                        if (gb) gb[j] += grow[j];
                    }
                }
                if (gx) {
                    // dx = inv/c * (c*dh - sum(dh) - xhat * sum(dh*xhat))
                    double sum_dh = 0.0, sum_dh_h = 0.0;
                    for (std::size_t j = 0; j < c; ++j) {
                        const double dh = grow[j] * pg->value[j];
                        sum_dh += dh;
                        sum_dh_h += dh * hrow[j];
                    }
                    const double inv = (*istd)[i];
                    for (std::size_t j = 0; j < c; ++j) {
                        const double dh = grow[j] * pg->value[j];
                        gx[i * c + j] +=
                            inv / cn * (cn * dh - sum_dh - hrow[j] * sum_dh_h);
                    }
                }
            }
        });
}

Tensor dropout(const Tensor& x, double rate, bool train, std::uint64_t seed) {
    if (rate < 0.0 || rate >= 1.0)
        throw ParameterError("dropout rate must lie in [0, 1), got " +
                             std::to_string(rate));
    if (!train || rate == 0.0) return x;
    Rng rng(derive_seed(seed, 0x64726f70ULL));
    const double keep_scale = 1.0 / (1.0 - rate);
    auto mask = std::make_shared<std::vector<double>>(x.numel());
    std::vector<double> v(x.numel());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double m = rng.uniform() >= rate ? keep_scale : 0.0;
        (*mask)[i] = m;
        v[i] = x.data()[i] * m;
    }
    auto out = detail::make_node(x.shape(), std::move(v));
    NodePtr px = x.node_ptr();
    std::size_t n = x.numel();
    return finish(std::move(out), "dropout", {px},
                  [px, mask, n](const Node&, const double* g, GradTape& tape) {
                      if (double* gx = tape.buffer_for(px))
                          for (std::size_t i = 0; i < n; ++i)
                              gx[i] += g[i] * (*mask)[i];
                  });
}

Tensor make_custom_op(
    const char* name, Shape out_shape, std::vector<double> value,
    std::vector<Tensor> parents,
    std::function<void(const Node& self, const double* grad_out, GradTape& tape)>
        backward) {
    auto out = detail::make_node(std::move(out_shape), std::move(value));
    std::vector<NodePtr> parent_nodes;
    parent_nodes.reserve(parents.size());
    for (const auto& p : parents) parent_nodes.push_back(p.node_ptr());
    return finish(std::move(out), name, std::move(parent_nodes),
                  std::move(backward));
}

GradCheckReport grad_check(const std::function<Tensor()>& f,
                           const std::vector<Tensor>& params, double eps) {
    if (eps < 1e-7 || eps > 1e-3)
        throw ParameterError("grad_check eps must lie in [1e-7, 1e-3]");
    Tensor loss = f();
    GradTape tape(loss);
    GradCheckReport report;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor param = params[p];
        Tensor analytic = tape.grad(param);
        auto& data = param.mutable_data();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double orig = data[i];
            data[i] = orig + eps;
            const double fp = f().item();
            data[i] = orig - eps;
            const double fm = f().item();
            data[i] = orig;
            const double numeric = (fp - fm) / (2.0 * eps);
            const double a = analytic.at(i);
            const double rel = std::abs(a - numeric) /
                               std::max({std::abs(a), std::abs(numeric), 1e-3});
            ++report.checked;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = p;
                report.worst_index = i;
            }
        }
    }
    return report;
}

} // namespace phishkit::numerics
