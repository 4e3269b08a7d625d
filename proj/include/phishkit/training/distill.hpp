#pragma once

#include <variant>

#include "phishkit/models/logits.hpp"
#include "phishkit/models/runner.hpp"
#include "phishkit/training/train.hpp"

namespace phishkit::training {

// Either a frozen in-process teacher or an imported logit table.
using TeacherSource =
    std::variant<const models::ModelGraph*, const models::TeacherLogits*>;

// The distillation loop: per batch, soften the frozen teacher's logits with
// tau, lift the student logit to the (0, z) class view, combine hard
// cross-entropy and softened KL per the alpha/tau^2 weighting, and update
// the student only. Teacher parameters are never touched.
History distill_train(models::ModelGraph& student, TeacherSource teacher,
                      const Dataset& train_set, const Dataset& val_set,
                      const DistillConfig& cfg);

// Teacher logits for every record of a dataset (eval mode), keyed by id.
models::TeacherLogits export_teacher_logits(const models::ModelGraph& teacher,
                                            const Dataset& data,
                                            std::size_t batch_size = 32);

} // namespace phishkit::training
