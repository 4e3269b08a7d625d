#pragma once

#include <string>
#include <vector>

#include "phishkit/corpus/record.hpp"

namespace phishkit::corpus {

// One answered phishing-indicator question. Binary answers are 0/1; scaled
// answers live on a 0-10 scale.
struct Answer {
    std::string question;
    enum class Kind { Binary, Scaled } kind = Kind::Binary;
    double value = 0.0;
    double weight = 0.0;
};

struct ScoreSheet {
    std::vector<Answer> answers;
    double composite = 0.0;
};

// Weighted mean of min-max normalized answers (binary -> {0,1}, scaled ->
// value/10). Weights must sum to 1 within 1e-9.
double composite_phishing_score(ScoreSheet& sheet);

// Rule-based answer provider standing in for the LLM judge: keyword and URL
// heuristics scoring urgency, flattery, link suspicion, marketing tone,
// personalization, implied consequences, credential requests and click
// pressure. Uniform weights.
ScoreSheet score_email(const EmailRecord& record);

} // namespace phishkit::corpus
