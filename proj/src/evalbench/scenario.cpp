#include "phishkit/evalbench/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "phishkit/error.hpp"
#include "phishkit/text/normalize.hpp"
#include "phishkit/text/vocab.hpp"

namespace phishkit::evalbench {

using corpus::EmailRecord;
using models::ModelConfig;
using models::ModelGraph;
using models::ModelKind;
using training::Dataset;

ScenarioRunConfig ScenarioRunConfig::desk_default() {
    ScenarioRunConfig rc;
    rc.student_budget.lr = 1e-3;
    rc.student_budget.epochs = 5;
    rc.student_budget.batch_size = 32;
    rc.teacher_budget.lr = 1e-3;
    rc.teacher_budget.epochs = 8;
    rc.teacher_budget.batch_size = 32;
    rc.distill_budget = training::DistillConfig{}; // alpha .5, tau 2, 1e-4, E3
    return rc;
}

namespace {

bool uses_wordpiece(ModelKind kind) {
    return kind == ModelKind::KdStudent || kind == ModelKind::TinyTeacher;
}

// Tokenizes a set of records against a vocabulary built elsewhere.
Dataset make_dataset(const std::vector<EmailRecord>& records,
                     const std::vector<std::size_t>& idx,
                     const text::Vocab& vocab, text::TokenMode mode,
                     std::size_t max_len) {
    Dataset d;
    d.seqs.reserve(idx.size());
    for (std::size_t i : idx) {
        const std::string norm = text::normalize_email(records[i].text(), mode);
        d.seqs.push_back(mode == text::TokenMode::Word
                             ? text::tokenize_word(norm, vocab, max_len)
                             : text::tokenize_wordpiece(norm, vocab, max_len));
        d.labels.push_back(records[i].label == corpus::Label::Phishing ? 1 : 0);
        d.ids.push_back(records[i].id);
    }
    return d;
}

std::vector<std::string> normalized_texts(
    const std::vector<EmailRecord>& records,
    const std::vector<std::size_t>& idx, text::TokenMode mode) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (std::size_t i : idx)
        out.push_back(text::normalize_email(records[i].text(), mode));
    return out;
}

FoldMetrics evaluate(ModelGraph& model, const Dataset& test) {
    auto probs = training::predict_dataset(model, test);
    std::vector<int> preds(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) preds[i] = probs[i] >= 0.5;
    ConfusionMatrix cm = confusion(preds, test.labels);
    Metrics m = metrics(cm);
    return {m.accuracy, m.precision, m.recall, m.f1, binary_weighted_f1(cm)};
}

ModelConfig scaled_config(ModelKind kind, const ScenarioRunConfig& rc,
                          std::size_t vocab_size) {
    ModelConfig cfg = ModelConfig::desk_default(kind);
    cfg.vocab_size = vocab_size;
    if (rc.embed_dim) cfg.embed_dim = rc.embed_dim;
    if (rc.hidden) {
        cfg.hidden = rc.hidden;
        if (kind == ModelKind::BilstmSh) cfg.head_dim = 2 * rc.hidden;
        if (kind == ModelKind::BilstmMh || kind == ModelKind::KdStudent)
            cfg.head_dim = std::max<std::size_t>(1, 2 * rc.hidden / cfg.heads);
    }
    return cfg;
}

// One fold of the protocol; returns test metrics.
FoldMetrics run_fold(const std::vector<EmailRecord>& records, ModelKind kind,
                     const ScenarioRunConfig& rc,
                     const std::vector<std::size_t>& train_idx,
                     const std::vector<std::size_t>& val_idx,
                     const std::vector<std::size_t>& test_idx,
                     std::uint64_t fold_seed) {
    const text::TokenMode mode = uses_wordpiece(kind) ? text::TokenMode::WordPiece
                                                      : text::TokenMode::Word;
    auto train_texts = normalized_texts(records, train_idx, mode);
    const text::Vocab vocab =
        mode == text::TokenMode::Word
            ? text::build_vocab(train_texts, rc.vocab_cap, rc.min_freq)
            : text::build_wordpiece_vocab(train_texts, rc.vocab_cap, rc.min_freq);

    ModelConfig cfg = scaled_config(kind, rc, vocab.size());
    Dataset train_ds = make_dataset(records, train_idx, vocab, mode, cfg.max_len);
    Dataset val_ds = make_dataset(records, val_idx, vocab, mode, cfg.max_len);
    Dataset test_ds = make_dataset(records, test_idx, vocab, mode, cfg.max_len);

    if (kind == ModelKind::KdStudent) {
        // 1. teacher trained on the fold's train split
        ModelConfig tcfg = scaled_config(ModelKind::TinyTeacher, rc, vocab.size());
        tcfg.embed_dim = cfg.embed_dim;
        ModelGraph teacher(tcfg, numerics::derive_seed(fold_seed, 1));
        training::TrainConfig tb = rc.teacher_budget;
        tb.seed = numerics::derive_seed(fold_seed, 2);
        training::train(teacher, train_ds, val_ds, tb);

        // 2. student with the teacher's embeddings
        ModelGraph student(cfg, numerics::derive_seed(fold_seed, 3));
        models::transfer_embeddings(student, teacher);

        // 3. hard-label warm-up, then the distillation stage
        if (rc.kd_warmup_epochs > 0) {
            training::TrainConfig wb = rc.student_budget;
            wb.epochs = rc.kd_warmup_epochs;
            wb.seed = numerics::derive_seed(fold_seed, 4);
            training::train(student, train_ds, val_ds, wb);
        }
        training::DistillConfig db = rc.distill_budget;
        db.seed = numerics::derive_seed(fold_seed, 5);
        training::distill_train(student, &teacher, train_ds, val_ds, db);
        return evaluate(student, test_ds);
    }

    if (kind == ModelKind::TinyTeacher) {
        ModelConfig tcfg = scaled_config(kind, rc, vocab.size());
        ModelGraph teacher(tcfg, numerics::derive_seed(fold_seed, 1));
        training::TrainConfig tb = rc.teacher_budget;
        tb.seed = numerics::derive_seed(fold_seed, 2);
        training::train(teacher, train_ds, val_ds, tb);
        return evaluate(teacher, test_ds);
    }

    ModelGraph model(cfg, numerics::derive_seed(fold_seed, 3));
    training::TrainConfig sb = rc.student_budget;
    sb.seed = numerics::derive_seed(fold_seed, 4);
    training::train(model, train_ds, val_ds, sb);
    return evaluate(model, test_ds);
}

FoldMetrics mean_of(const std::vector<FoldMetrics>& folds) {
    FoldMetrics m;
    for (const auto& f : folds) {
        m.acc += f.acc;
        m.precision += f.precision;
        m.recall += f.recall;
        m.f1 += f.f1;
        m.weighted_f1 += f.weighted_f1;
    }
    const double n = double(folds.size());
    m.acc /= n;
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
    m.weighted_f1 /= n;
    return m;
}

FoldMetrics stddev_of(const std::vector<FoldMetrics>& folds,
                      const FoldMetrics& mean) {
    FoldMetrics s;
    if (folds.size() < 2) return s;
    for (const auto& f : folds) {
        s.acc += (f.acc - mean.acc) * (f.acc - mean.acc);
        s.precision +=
            (f.precision - mean.precision) * (f.precision - mean.precision);
        s.recall += (f.recall - mean.recall) * (f.recall - mean.recall);
        s.f1 += (f.f1 - mean.f1) * (f.f1 - mean.f1);
        s.weighted_f1 +=
            (f.weighted_f1 - mean.weighted_f1) * (f.weighted_f1 - mean.weighted_f1);
    }
    const double n = double(folds.size() - 1);
    s.acc = std::sqrt(s.acc / n);
    s.precision = std::sqrt(s.precision / n);
    s.recall = std::sqrt(s.recall / n);
    s.f1 = std::sqrt(s.f1 / n);
    s.weighted_f1 = std::sqrt(s.weighted_f1 / n);
    return s;
}

} // namespace

ScenarioReport run_scenario(const std::vector<EmailRecord>& records,
                            ModelKind kind, const ScenarioSpec& spec,
                            const ScenarioRunConfig& rc) {
    ScenarioPools pools = scenario_split(records, spec, rc.seed);

    auto labels_of = [&](const std::vector<std::size_t>& pool) {
        std::vector<int> out;
        out.reserve(pool.size());
        for (std::size_t i : pool)
            out.push_back(records[i].label == corpus::Label::Phishing ? 1 : 0);
        return out;
    };
    FoldPlan train_plan =
        stratified_kfold(labels_of(pools.train_pool), rc.folds,
                         {0.72, 0.08, 0.20}, rc.seed);
    FoldPlan test_plan =
        pools.shared ? train_plan
                     : stratified_kfold(labels_of(pools.test_pool), rc.folds,
                                        {0.72, 0.08, 0.20}, rc.seed);

    ScenarioReport report;
    report.model = to_string(kind);
    report.scenario = spec.str();
    report.pool_size = pools.shared
                           ? pools.train_pool.size()
                           : pools.train_pool.size() + pools.test_pool.size();

    for (std::size_t f = 0; f < rc.folds; ++f) {
        auto to_corpus = [](const std::vector<std::size_t>& pool,
                            const std::vector<std::size_t>& plan_idx) {
            std::vector<std::size_t> out;
            out.reserve(plan_idx.size());
            for (std::size_t i : plan_idx) out.push_back(pool[i]);
            return out;
        };
        auto train_idx = to_corpus(pools.train_pool, train_plan.folds[f].train);
        auto val_idx = to_corpus(pools.train_pool, train_plan.folds[f].val);
        auto test_idx = to_corpus(pools.test_pool, test_plan.folds[f].test);
        if (f == 0)
            report.total_samples =
                train_idx.size() + val_idx.size() + test_idx.size();
        report.folds.push_back(
            run_fold(records, kind, rc, train_idx, val_idx, test_idx,
                     numerics::derive_seed(rc.seed, 0xf01dULL + f)));
    }
    report.mean = mean_of(report.folds);
    report.stddev = stddev_of(report.folds, report.mean);
    return report;
}

void save_metrics_csv(const std::vector<ScenarioReport>& reports,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write metrics csv " + path);
    out << "model,scenario,fold,acc,precision,recall,f1,weighted_f1\n";
    char buf[160];
    auto row = [&](const std::string& model, const std::string& scenario,
                   const std::string& fold, const FoldMetrics& m) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                      model.c_str(), scenario.c_str(), fold.c_str(), m.acc,
                      m.precision, m.recall, m.f1, m.weighted_f1);
        out << buf;
    };
    for (const auto& r : reports) {
        for (std::size_t f = 0; f < r.folds.size(); ++f)
            row(r.model, r.scenario, std::to_string(f), r.folds[f]);
        row(r.model, r.scenario, "mean", r.mean);
    }
}

} // namespace phishkit::evalbench
