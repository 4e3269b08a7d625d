#include "phishkit/corpus/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "phishkit/error.hpp"
#include "phishkit/text/normalize.hpp"

namespace phishkit::corpus {

double composite_phishing_score(ScoreSheet& sheet) {
    if (sheet.answers.empty())
        throw ParameterError("composite_phishing_score: no answered questions");
    double weight_sum = 0.0;
    for (const auto& a : sheet.answers) weight_sum += a.weight;
    if (std::abs(weight_sum - 1.0) > 1e-9)
        throw ParameterError("composite_phishing_score: weights sum to " +
                             std::to_string(weight_sum) + ", expected 1");
    double composite = 0.0;
    for (const auto& a : sheet.answers) {
        double normalized;
        if (a.kind == Answer::Kind::Binary) {
            if (a.value != 0.0 && a.value != 1.0)
                throw ParameterError("binary answer must be 0 or 1");
            normalized = a.value;
        } else {
            if (a.value < 0.0 || a.value > 10.0)
                throw ParameterError("scaled answer must lie in [0, 10]");
            normalized = a.value / 10.0;
        }
        composite += a.weight * normalized;
    }
    sheet.composite = composite;
    return composite;
}

namespace {

std::size_t count_any(const std::string& text,
                      const std::vector<std::string>& needles) {
    std::size_t hits = 0;
    for (const auto& n : needles) {
        std::size_t pos = 0;
        while ((pos = text.find(n, pos)) != std::string::npos) {
            ++hits;
            pos += n.size();
        }
    }
    return hits;
}

double scaled_hits(std::size_t hits, std::size_t saturate) {
    return 10.0 * std::min<double>(1.0, double(hits) / double(saturate));
}

} // namespace

ScoreSheet score_email(const EmailRecord& record) {
    const std::string text =
        text::normalize_email(record.text(), text::TokenMode::WordPiece);

    ScoreSheet sheet;
    auto add_binary = [&](const std::string& q, bool v) {
        sheet.answers.push_back({q, Answer::Kind::Binary, v ? 1.0 : 0.0, 0.0});
    };
    auto add_scaled = [&](const std::string& q, double v) {
        sheet.answers.push_back({q, Answer::Kind::Scaled, v, 0.0});
    };

    add_binary("conveys urgency or panic",
               count_any(text, {"urgent", "immediately", "act fast", "expires",
                                "final notice", "now", "midnight"}) >= 2);
    add_scaled("amount of flattery",
               scaled_hits(count_any(text, {"congratulations", "lucky",
                                            "winner", "selected", "valued"}),
                           2));
    add_scaled("link suspiciousness",
               scaled_hits(count_any(text, {"http://", ".xyz", ".biz", ".club",
                                            ".top", "portal", "link"}),
                           2));
    add_scaled("resembles a marketing message",
               scaled_hits(count_any(text, {"free", "bonus", "offer", "prize",
                                            "reward", "cash"}),
                           3));
    add_binary("addresses recipient or overly specific",
               count_any(text, {"dear ", "hi ", "hello "}) > 0);
    add_scaled("implies consequences for inaction",
               scaled_hits(count_any(text, {"suspended", "lose access",
                                            "interruption", "failure to",
                                            "remain active", "warning"}),
                           2));
    add_binary("requests account updates or credentials",
               count_any(text, {"password", "credential", "verify your",
                                "confirm your", "bank details", "card number",
                                "billing"}) > 0);
    add_scaled("pressure to click urgently",
               scaled_hits(count_any(text, {"click", "claim", "access the",
                                            "act fast"}),
                           2));

    const double w = 1.0 / double(sheet.answers.size());
    for (auto& a : sheet.answers) a.weight = w;
    composite_phishing_score(sheet);
    return sheet;
}

} // namespace phishkit::corpus
