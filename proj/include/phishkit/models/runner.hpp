#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "phishkit/models/graph.hpp"

namespace phishkit::models {

// Tape-free eval-only forward pass with selectable scalar width. The f64
// instantiation mirrors the graph forward arithmetic; the f32 instantiation
// is the deployment-arithmetic path used for latency benchmarks.
template <typename S>
class InferenceRunner {
  public:
    explicit InferenceRunner(const ModelGraph& m);

    // Probability of the phishing class per sample.
    std::vector<double> predict_proba(const TokenBatch& batch) const;
    // Class logits per sample; students report the 2-logit view (0, z).
    std::vector<std::array<double, 2>> predict_logits(
        const TokenBatch& batch) const;

  private:
    struct Mat {
        std::vector<S> v;
        std::size_t r = 0, c = 0;
        const S* row(std::size_t i) const { return v.data() + i * c; }
        S* row(std::size_t i) { return v.data() + i * c; }
    };

    const Mat& at(const std::string& name) const;
    Mat lstm_scan(const Mat& emb, const TokenBatch& batch,
                  const std::string& prefix, bool reverse, Mat* final_h) const;
    Mat attention(const Mat& h, const TokenBatch& batch,
                  const std::string& prefix, std::size_t heads) const;
    Mat pool(const Mat& x, const TokenBatch& batch) const;
    std::vector<std::array<double, 2>> student_forward(
        const TokenBatch& batch) const;
    std::vector<std::array<double, 2>> teacher_forward(
        const TokenBatch& batch) const;

    ModelConfig cfg_;
    std::map<std::string, Mat> params_;
};

extern template class InferenceRunner<float>;
extern template class InferenceRunner<double>;

} // namespace phishkit::models
