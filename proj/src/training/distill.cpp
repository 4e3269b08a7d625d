#include "phishkit/training/distill.hpp"

#include "phishkit/error.hpp"

namespace phishkit::training {

namespace ops = phishkit::numerics;
using models::InferenceRunner;
using models::ModelGraph;
using models::TeacherLogits;
using models::TokenBatch;

models::TeacherLogits export_teacher_logits(const ModelGraph& teacher,
                                            const Dataset& data,
                                            std::size_t batch_size) {
    if (data.ids.size() != data.size())
        throw ContractError("export_teacher_logits: dataset lacks record ids");
    InferenceRunner<double> runner(teacher);
    TeacherLogits out;
    for (std::size_t start = 0; start < data.size(); start += batch_size) {
        const std::size_t end = std::min(data.size(), start + batch_size);
        std::vector<std::size_t> idx(end - start);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = start + i;
        TokenBatch batch =
            detail::gather_batch(data, idx, teacher.config().max_len);
        auto logits = runner.predict_logits(batch);
        for (std::size_t i = 0; i < idx.size(); ++i)
            out.logits[data.ids[idx[i]]] = logits[i];
    }
    return out;
}

History distill_train(ModelGraph& student, TeacherSource teacher,
                      const Dataset& train_set, const Dataset& val_set,
                      const DistillConfig& cfg) {
    cfg.validate();
    if (train_set.size() == 0)
        throw ParameterError("distill_train: empty training set");
    if (!models::is_student(student.config().kind))
        throw ContractError("distill_train: the trainee must be a student");

    // Frozen-teacher setup: either a parameter snapshot (runner) or a logit
    // table covering every training record.
    std::unique_ptr<InferenceRunner<double>> runner;
    const TeacherLogits* table = nullptr;
    if (auto* graph = std::get_if<const ModelGraph*>(&teacher)) {
        runner = std::make_unique<InferenceRunner<double>>(**graph);
    } else {
        table = std::get<const TeacherLogits*>(teacher);
        if (train_set.ids.size() != train_set.size())
            throw ContractError("distill_train: dataset lacks record ids");
        auto missing = table->missing(train_set.ids);
        if (!missing.empty()) {
            std::string msg = "distill_train: teacher logits missing for ids:";
            for (const auto& id : missing) msg += " " + id;
            throw ContractError(msg);
        }
    }

    AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};
    AdamState state;
    std::set<std::string> frozen;
    if (student.embeddings_frozen()) frozen.insert("embed.table");

    History history;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto batches = detail::make_batches(train_set.size(), cfg.batch_size,
                                            cfg.seed, epoch);
        double loss_sum = 0.0;
        for (std::size_t step = 0; step < batches.size(); ++step) {
            const auto& idx = batches[step];
            TokenBatch batch = detail::gather_batch(train_set, idx,
                                                    student.config().max_len);
            std::vector<int> labels;
            labels.reserve(idx.size());
            for (std::size_t i : idx) labels.push_back(train_set.labels[i]);

            // teacher forward pass (never part of the gradient graph)
            std::vector<std::array<double, 2>> z_t(idx.size());
            if (runner) {
                z_t = runner->predict_logits(batch);
            } else {
                for (std::size_t i = 0; i < idx.size(); ++i)
                    z_t[i] = table->logits.at(train_set.ids[idx[i]]);
            }

            ops::Tensor z_s = student.forward(
                batch, /*train=*/true, detail::step_seed(cfg.seed, epoch, step));
            Tensor lifted = z_s;
            if (z_s.cols() == 1)
                lifted =
                    ops::concat_cols({Tensor::zeros({z_s.rows(), 1}), z_s});
            LossBreakdown lb;
            lb.l_hard = softmax_xent(lifted, labels);
            lb.l_soft = kl_soft_loss(lifted, z_t, cfg.tau);
            lb.l_distill = ops::add(
                ops::scale(lb.l_hard, cfg.alpha),
                ops::scale(lb.l_soft, (1.0 - cfg.alpha) * cfg.tau * cfg.tau));

            ops::GradMap grads = ops::backward(lb.l_distill);
            adam_step(student.params(), grads, state, adam, frozen);

            const double l = lb.l_distill.item();
            loss_sum += l;
            history.steps.push_back(
                {epoch, step, lb.l_hard.item(), lb.l_soft.item(), l});
        }
        history.epochs.push_back(detail::validate_epoch(
            student, val_set, epoch, cfg.batch_size,
            loss_sum / double(batches.size())));
    }
    return history;
}

} // namespace phishkit::training
