#include "phishkit/evalbench/metrics.hpp"

#include "phishkit/error.hpp"

namespace phishkit::evalbench {

ConfusionMatrix confusion(const std::vector<int>& preds,
                          const std::vector<int>& labels) {
    if (preds.size() != labels.size())
        throw ContractError("confusion: " + std::to_string(preds.size()) +
                            " predictions vs " + std::to_string(labels.size()) +
                            " labels");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] != 0;
        const bool y = labels[i] != 0;
        if (p && y) ++cm.tp;
        else if (p && !y) ++cm.fp;
        else if (!p && y) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw ParameterError("metrics: empty confusion matrix");
    Metrics m;
    m.accuracy = double(cm.tp + cm.tn) / double(cm.total());
    if (cm.tp + cm.fp > 0) {
        m.precision = double(cm.tp) / double(cm.tp + cm.fp);
    } else {
        m.degenerate = true;
    }
    if (cm.tp + cm.fn > 0) {
        m.recall = double(cm.tp) / double(cm.tp + cm.fn);
    } else {
        m.degenerate = true;
    }
    if (m.precision + m.recall > 0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.degenerate = true;
    }
    return m;
}

double weighted_f1(const std::vector<double>& per_class_f1,
                   const std::vector<std::size_t>& class_supports) {
    if (per_class_f1.size() != class_supports.size())
        throw ContractError("weighted_f1: f1/support length mismatch");
    if (per_class_f1.empty())
        throw ParameterError("weighted_f1: no classes");
    double total = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < per_class_f1.size(); ++i) {
        if (class_supports[i] == 0) continue;
        total += double(class_supports[i]);
        weighted += double(class_supports[i]) * per_class_f1[i];
    }
    if (total == 0.0) throw ParameterError("weighted_f1: zero total support");
    return weighted / total;
}

double binary_weighted_f1(const ConfusionMatrix& cm) {
    Metrics pos = metrics(cm);
    // legitimate class: swap the positive/negative roles
    ConfusionMatrix neg{cm.tn, cm.fn, cm.fp, cm.tp};
    Metrics negm = metrics(neg);
    const std::size_t support_pos = cm.tp + cm.fn;
    const std::size_t support_neg = cm.tn + cm.fp;
    return weighted_f1({negm.f1, pos.f1}, {support_neg, support_pos});
}

} // namespace phishkit::evalbench
