#pragma once

#include <cstddef>
#include <vector>

namespace phishkit::evalbench {

// Binary confusion counts with phishing as the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
};

ConfusionMatrix confusion(const std::vector<int>& preds,
                          const std::vector<int>& labels);

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // set when a zero denominator forced the stated 0 convention
    bool degenerate = false;
};

// accuracy (TP+TN)/total, precision TP/(TP+FP), recall TP/(TP+FN),
// F1 = 2PR/(P+R); zero denominators yield 0 with the degenerate flag.
Metrics metrics(const ConfusionMatrix& cm);

// Support-weighted mean of per-class F1 scores.
double weighted_f1(const std::vector<double>& per_class_f1,
                   const std::vector<std::size_t>& class_supports);

// Weighted F1 over the two classes (legitimate and phishing) of a binary
// confusion matrix.
double binary_weighted_f1(const ConfusionMatrix& cm);

} // namespace phishkit::evalbench
