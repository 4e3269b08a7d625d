#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phishkit/models/graph.hpp"
#include "phishkit/training/adam.hpp"
#include "phishkit/training/loss.hpp"

namespace phishkit::training {

// Published student schedule: Adam at 1e-3, batch 32, 5 epochs.
struct TrainConfig {
    double lr = 1e-3;
    std::size_t epochs = 5;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;

    void validate() const;
};

struct Dataset {
    std::vector<text::TokenSequence> seqs;
    std::vector<int> labels; // 1 = phishing
    std::vector<std::string> ids;

    std::size_t size() const { return seqs.size(); }
};

struct StepLog {
    std::size_t epoch = 0;
    std::size_t step = 0;
    double l_hard = 0.0;
    double l_soft = 0.0;
    double l_distill = 0.0;
};

struct EpochStats {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double val_acc = 0.0;
    double val_f1 = 0.0;
    bool has_val = false;
};

struct History {
    std::vector<StepLog> steps;
    std::vector<EpochStats> epochs;

    // CSV columns: epoch,step,l_hard,l_soft,l_distill,val_acc,val_f1 (the
    // validation columns are filled on each epoch's closing row).
    void save_csv(const std::string& path) const;
};

// Mini-batch Adam training with per-epoch seeded shuffling; the last partial
// batch is kept. Students minimize binary cross-entropy on the sigmoid
// output, the teacher minimizes 2-class softmax cross-entropy.
History train(models::ModelGraph& model, const Dataset& train_set,
              const Dataset& val_set, const TrainConfig& cfg);

// Model probabilities over a dataset, eval mode, batched.
std::vector<double> predict_dataset(models::ModelGraph& model,
                                    const Dataset& data,
                                    std::size_t batch_size = 32);

namespace detail {
// Shared by train() and distill_train() so that alpha=1 distillation walks
// the exact same batch and dropout schedule as plain training.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n,
                                                   std::size_t batch_size,
                                                   std::uint64_t seed,
                                                   std::size_t epoch);
models::TokenBatch gather_batch(const Dataset& data,
                                const std::vector<std::size_t>& idx,
                                std::size_t max_len);
std::uint64_t step_seed(std::uint64_t seed, std::size_t epoch,
                        std::size_t step);
EpochStats validate_epoch(models::ModelGraph& model, const Dataset& val,
                          std::size_t epoch, std::size_t batch_size,
                          double mean_loss);
} // namespace detail

} // namespace phishkit::training
