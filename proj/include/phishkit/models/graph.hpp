#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phishkit/layers/attention.hpp"
#include "phishkit/layers/common.hpp"
#include "phishkit/layers/lstm.hpp"
#include "phishkit/text/tokenize.hpp"

namespace phishkit::models {

using layers::SeqBatch;
using numerics::Tensor;

enum class ModelKind { Lstm, Bilstm, BilstmSh, BilstmMh, KdStudent, TinyTeacher };

std::string to_string(ModelKind kind);
ModelKind model_kind_from(const std::string& name);
bool is_student(ModelKind kind);

struct ModelConfig {
    ModelKind kind = ModelKind::Bilstm;
    std::size_t vocab_size = 30000;
    std::size_t embed_dim = 128;
    std::size_t hidden = 128;
    std::size_t heads = 4;
    std::size_t head_dim = 64;
    std::size_t layers = 4;  // transformer depth (teacher only)
    std::size_t ffn_dim = 0; // teacher feed-forward width; 0 means 4*embed_dim
    std::size_t max_len = 512;
    double dropout = 0.5;

    // Full-size configuration: students at the published sizes (word-level
    // students on 100-dim embeddings, the distilled student sharing the
    // teacher's 128-dim table), teacher with 4 layers.
    static ModelConfig paper_default(ModelKind kind);
    // Reduced dimensions for CPU-scale scenario sweeps.
    static ModelConfig desk_default(ModelKind kind);
};

// A padded batch of token ids, batch-major like SeqBatch.
struct TokenBatch {
    std::vector<std::size_t> ids; // batch*steps
    std::size_t batch = 0;
    std::size_t steps = 0;
    std::vector<double> mask; // 1.0 token / 0.0 pad
};

TokenBatch make_token_batch(const std::vector<text::TokenSequence>& seqs,
                            std::size_t max_len);

// A configured model: named parameter tensors plus a forward pass producing
// logits ([B x 1] pre-sigmoid for students, [B x 2] class logits for the
// teacher). Forward is deterministic in eval mode.
class ModelGraph {
  public:
    ModelGraph(const ModelConfig& cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }

    Tensor forward(const TokenBatch& batch, bool train,
                   std::uint64_t step_seed = 0);
    // Probability of the phishing class per sample, eval mode.
    std::vector<double> predict_proba(const TokenBatch& batch);

    std::map<std::string, Tensor>& params() { return params_; }
    const std::map<std::string, Tensor>& params() const { return params_; }
    Tensor embedding() const { return params_.at("embed.table"); }

    bool embeddings_frozen() const { return freeze_embeddings_; }
    void set_freeze_embeddings(bool freeze) { freeze_embeddings_ = freeze; }

    std::size_t param_count() const;
    std::size_t param_count_non_embedding() const;

    void save(const std::string& path) const;
    static ModelGraph load(const std::string& path);

  private:
    void build(std::uint64_t seed);
    Tensor forward_student(const SeqBatch& sb, const TokenBatch& batch,
                           bool train, std::uint64_t step_seed);
    Tensor forward_teacher(const SeqBatch& sb, const TokenBatch& batch,
                           bool train, std::uint64_t step_seed);
    layers::LstmParams lstm_at(const std::string& prefix) const;
    layers::MultiHeadParams mha_at(const std::string& prefix,
                                   std::size_t heads) const;

    ModelConfig cfg_;
    std::map<std::string, Tensor> params_;
    bool freeze_embeddings_ = false;
};

// Copies the teacher's embedding table into the student. Shapes must match
// exactly; the table stays trainable unless the student freezes it.
void transfer_embeddings(ModelGraph& student, const ModelGraph& teacher);

std::size_t param_count(const ModelGraph& m);

} // namespace phishkit::models
