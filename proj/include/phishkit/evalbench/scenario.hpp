#pragma once

#include "phishkit/corpus/record.hpp"
#include "phishkit/evalbench/metrics.hpp"
#include "phishkit/evalbench/splits.hpp"
#include "phishkit/models/graph.hpp"
#include "phishkit/training/distill.hpp"
#include "phishkit/training/train.hpp"

namespace phishkit::evalbench {

struct FoldMetrics {
    double acc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double weighted_f1 = 0.0;
};

struct ScenarioReport {
    std::string model;
    std::string scenario;
    std::vector<FoldMetrics> folds;
    FoldMetrics mean;
    FoldMetrics stddev;
    std::size_t pool_size = 0;          // unique records in the scenario pools
    std::size_t total_samples = 0;      // train+val+test of one fold
};

// Everything a scenario sweep needs: model scale, text pipeline caps and the
// three training budgets (students, teacher, distillation).
struct ScenarioRunConfig {
    std::uint64_t seed = 1;
    std::size_t folds = 5;
    std::size_t vocab_cap = 4000;
    std::size_t min_freq = 1;
    // base model dimensions come from ModelConfig::desk_default and may be
    // overridden here when nonzero
    std::size_t embed_dim = 0;
    std::size_t hidden = 0;
    training::TrainConfig student_budget;   // Adam 1e-3, 5 epochs, batch 32
    training::TrainConfig teacher_budget;   // teacher pre-training schedule
    training::DistillConfig distill_budget; // alpha .5, tau 2, 1e-4, 3 epochs
    // hard-label warm-up of the distilled student before the distillation
    // stage (the published student starts from the trained attention model)
    std::size_t kd_warmup_epochs = 5;

    static ScenarioRunConfig desk_default();
};

// The full per-fold protocol: build the text pipeline from the fold's train
// split, train the model (teacher + warm-up + distillation for the student),
// evaluate on the fold's test block, then average over folds.
ScenarioReport run_scenario(const std::vector<corpus::EmailRecord>& records,
                            models::ModelKind kind, const ScenarioSpec& spec,
                            const ScenarioRunConfig& rc);

// CSV rows `model,scenario,fold,acc,precision,recall,f1,weighted_f1`: one
// row per fold plus a mean row.
void save_metrics_csv(const std::vector<ScenarioReport>& reports,
                      const std::string& path);

} // namespace phishkit::evalbench
