#include "phishkit/training/train.hpp"

#include <cstdio>
#include <fstream>

#include "phishkit/error.hpp"
#include "phishkit/evalbench/metrics.hpp"
#include "phishkit/numerics/rng.hpp"

namespace phishkit::training {

namespace ops = phishkit::numerics;
using models::ModelGraph;
using models::ModelKind;
using models::TokenBatch;

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ParameterError("train lr must be positive");
    if (batch_size < 1) throw ParameterError("train batch_size must be >= 1");
}

void History::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write history csv " + path);
    out << "epoch,step,l_hard,l_soft,l_distill,val_acc,val_f1\n";
    char buf[128];
    // index of the last step per epoch, where validation columns land
    std::map<std::size_t, std::size_t> last_step;
    for (std::size_t i = 0; i < steps.size(); ++i) last_step[steps[i].epoch] = i;
    std::map<std::size_t, const EpochStats*> stats;
    for (const auto& e : epochs) stats[e.epoch] = &e;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%.17g", s.epoch,
                      s.step, s.l_hard, s.l_soft, s.l_distill);
        out << buf;
        auto it = stats.find(s.epoch);
        if (it != stats.end() && it->second->has_val &&
            last_step[s.epoch] == i) {
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", it->second->val_acc,
                          it->second->val_f1);
            out << buf;
        } else {
            out << ",,";
        }
        out << "\n";
    }
}

namespace detail {

std::vector<std::vector<std::size_t>> make_batches(std::size_t n,
                                                   std::size_t batch_size,
                                                   std::uint64_t seed,
                                                   std::size_t epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    ops::Rng rng(ops::derive_seed(seed, 0x73687566ULL + epoch));
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return batches;
}

TokenBatch gather_batch(const Dataset& data,
                        const std::vector<std::size_t>& idx,
                        std::size_t max_len) {
    std::vector<text::TokenSequence> seqs;
    seqs.reserve(idx.size());
    for (std::size_t i : idx) seqs.push_back(data.seqs[i]);
    return models::make_token_batch(seqs, max_len);
}

std::uint64_t step_seed(std::uint64_t seed, std::size_t epoch,
                        std::size_t step) {
    return ops::derive_seed(seed, (std::uint64_t(epoch) << 24) | step);
}

} // namespace detail

std::vector<double> predict_dataset(ModelGraph& model, const Dataset& data,
                                    std::size_t batch_size) {
    std::vector<double> probs;
    probs.reserve(data.size());
    for (std::size_t start = 0; start < data.size(); start += batch_size) {
        const std::size_t end = std::min(data.size(), start + batch_size);
        std::vector<std::size_t> idx(end - start);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = start + i;
        TokenBatch batch = detail::gather_batch(data, idx, model.config().max_len);
        auto p = model.predict_proba(batch);
        probs.insert(probs.end(), p.begin(), p.end());
    }
    return probs;
}

namespace detail {

EpochStats validate_epoch(ModelGraph& model, const Dataset& val,
                          std::size_t epoch, std::size_t batch_size,
                          double mean_loss) {
    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = mean_loss;
    if (val.size() == 0) return stats;
    auto probs = predict_dataset(model, val, batch_size);
    std::vector<int> preds(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) preds[i] = probs[i] >= 0.5;
    auto cm = evalbench::confusion(preds, val.labels);
    auto m = evalbench::metrics(cm);
    stats.val_acc = m.accuracy;
    stats.val_f1 = m.f1;
    stats.has_val = true;
    return stats;
}

} // namespace detail

History train(ModelGraph& model, const Dataset& train_set,
              const Dataset& val_set, const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.size() == 0)
        throw ParameterError("train: empty training set");
    if (train_set.labels.size() != train_set.size())
        throw ContractError("train: labels/sequences length mismatch");

    AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps_adam};
    AdamState state;
    std::set<std::string> frozen;
    if (model.embeddings_frozen()) frozen.insert("embed.table");

    History history;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto batches = detail::make_batches(train_set.size(), cfg.batch_size,
                                            cfg.seed, epoch);
        double loss_sum = 0.0;
        for (std::size_t step = 0; step < batches.size(); ++step) {
            TokenBatch batch = detail::gather_batch(train_set, batches[step],
                                                    model.config().max_len);
            std::vector<int> labels;
            labels.reserve(batches[step].size());
            for (std::size_t i : batches[step])
                labels.push_back(train_set.labels[i]);

            ops::Tensor logits = model.forward(
                batch, /*train=*/true, detail::step_seed(cfg.seed, epoch, step));
            ops::Tensor loss;
            if (model.config().kind == ModelKind::TinyTeacher) {
                loss = softmax_xent(logits, labels);
            } else {
                loss = bce_loss(ops::sigmoid(logits), labels);
            }
            ops::GradMap grads = ops::backward(loss);
            adam_step(model.params(), grads, state, adam, frozen);

            const double l = loss.item();
            loss_sum += l;
            history.steps.push_back({epoch, step, l, 0.0, l});
        }
        history.epochs.push_back(detail::validate_epoch(
            model, val_set, epoch, cfg.batch_size, loss_sum / double(batches.size())));
    }
    return history;
}

} // namespace phishkit::training
