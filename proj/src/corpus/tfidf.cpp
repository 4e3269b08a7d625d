#include "phishkit/corpus/tfidf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>

#include "phishkit/error.hpp"
#include "phishkit/text/normalize.hpp"

namespace phishkit::corpus {

namespace {

std::atomic<std::uint64_t> g_snapshot_counter{1};

std::vector<std::string> doc_terms(const std::string& doc) {
    return text::split_tokens(
        text::normalize_email(doc, text::TokenMode::Word), text::TokenMode::Word);
}

} // namespace

TfIdfVectorizer TfIdfVectorizer::fit(const std::vector<std::string>& docs) {
    if (docs.empty()) throw ParameterError("TfIdfVectorizer: empty fit corpus");
    TfIdfVectorizer v;
    v.snapshot_ = g_snapshot_counter.fetch_add(1);
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        auto terms = doc_terms(doc);
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
        for (const auto& t : terms) ++df[t];
    }
    const double n = static_cast<double>(docs.size());
    v.idf_.reserve(df.size());
    for (const auto& [term, count] : df) {
        v.term_ids_[term] = v.idf_.size();
        v.idf_.push_back(std::log((1.0 + n) / (1.0 + double(count))) + 1.0);
    }
    return v;
}

TfIdfVectorizer TfIdfVectorizer::fit_records(
    const std::vector<EmailRecord>& records) {
    std::vector<std::string> docs;
    docs.reserve(records.size());
    for (const auto& r : records) docs.push_back(r.text());
    return fit(docs);
}

TfIdfVector TfIdfVectorizer::transform(const std::string& doc) const {
    TfIdfVector out;
    out.snapshot = snapshot_;
    std::unordered_map<std::size_t, double> counts;
    for (const auto& term : doc_terms(doc)) {
        auto it = term_ids_.find(term);
        if (it != term_ids_.end()) counts[it->second] += 1.0;
    }
    double norm_sq = 0.0;
    for (const auto& [id, tf] : counts) {
        const double w = tf * idf_[id];
        out.weights[id] = w;
        norm_sq += w * w;
    }
    out.norm = std::sqrt(norm_sq);
    out.empty_doc = out.weights.empty();
    return out;
}

double TfIdfVectorizer::idf_of(const std::string& term) const {
    auto it = term_ids_.find(term);
    if (it == term_ids_.end())
        throw ParameterError("idf_of: unseen term \"" + term + "\"");
    return idf_[it->second];
}

double cosine_similarity(const TfIdfVector& a, const TfIdfVector& b) {
    if (a.snapshot != b.snapshot)
        throw ContractError(
            "cosine_similarity: vectors from different vocabulary snapshots");
    if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
    const TfIdfVector& small = a.weights.size() <= b.weights.size() ? a : b;
    const TfIdfVector& large = a.weights.size() <= b.weights.size() ? b : a;
    double dot = 0.0;
    for (const auto& [id, w] : small.weights) {
        auto it = large.weights.find(id);
        if (it != large.weights.end()) dot += w * it->second;
    }
    return dot / (a.norm * b.norm);
}

namespace {

DistributionSummary summarize(std::vector<double> xs) {
    DistributionSummary s;
    s.count = xs.size();
    if (xs.empty()) return s;
    std::sort(xs.begin(), xs.end());
    double total = 0.0;
    for (double x : xs) total += x;
    s.mean = total / double(xs.size());
    auto quantile = [&](double q) {
        const double pos = q * double(xs.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const double frac = pos - double(lo);
        if (lo + 1 < xs.size()) return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
        return xs[lo];
    };
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    return s;
}

} // namespace

SimilarityReport similarity_analysis(
    const std::vector<EmailRecord>& legit,
    const std::vector<EmailRecord>& phish_human,
    const std::vector<EmailRecord>& phish_llm) {
    if (legit.empty() || phish_human.empty() || phish_llm.empty())
        throw ParameterError("similarity_analysis: all three sets must be nonempty");

    std::vector<EmailRecord> all;
    all.insert(all.end(), legit.begin(), legit.end());
    all.insert(all.end(), phish_human.begin(), phish_human.end());
    all.insert(all.end(), phish_llm.begin(), phish_llm.end());
    TfIdfVectorizer vec = TfIdfVectorizer::fit_records(all);

    auto transform_all = [&](const std::vector<EmailRecord>& rs) {
        std::vector<TfIdfVector> out;
        out.reserve(rs.size());
        for (const auto& r : rs) out.push_back(vec.transform(r.text()));
        return out;
    };
    auto v_legit = transform_all(legit);
    auto v_human = transform_all(phish_human);
    auto v_llm = transform_all(phish_llm);

    SimilarityReport report;
    std::vector<double> means_human, means_llm;
    for (std::size_t i = 0; i < v_legit.size(); ++i) {
        double sum_h = 0.0;
        for (const auto& p : v_human) sum_h += cosine_similarity(v_legit[i], p);
        double sum_l = 0.0;
        for (const auto& p : v_llm) sum_l += cosine_similarity(v_legit[i], p);
        const double mh = sum_h / double(v_human.size());
        const double ml = sum_l / double(v_llm.size());
        means_human.push_back(mh);
        means_llm.push_back(ml);
        report.rows.push_back({legit[i].id, "human", mh});
        report.rows.push_back({legit[i].id, "llm", ml});
    }
    report.vs_human = summarize(std::move(means_human));
    report.vs_llm = summarize(std::move(means_llm));
    return report;
}

void save_similarity_csv(const SimilarityReport& report,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write similarity csv " + path);
    out << "legit_id,vs_class,mean_cosine\n";
    char buf[64];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", row.mean_cosine);
        out << row.legit_id << "," << row.vs_class << "," << buf << "\n";
    }
}

DedupResult dedup(const std::vector<EmailRecord>& records, double threshold) {
    if (!(threshold > 0.0) || threshold > 1.0)
        throw ParameterError("dedup threshold must lie in (0, 1], got " +
                             std::to_string(threshold));
    DedupResult result;
    if (records.empty()) return result;
    TfIdfVectorizer vec = TfIdfVectorizer::fit_records(records);
    std::vector<TfIdfVector> kept_vecs;
    for (const auto& rec : records) {
        TfIdfVector v = vec.transform(rec.text());
        bool duplicate = false;
        for (std::size_t k = 0; k < kept_vecs.size(); ++k) {
            const double score = cosine_similarity(v, kept_vecs[k]);
            if (score >= threshold) {
                result.removed.push_back({rec.id, result.kept[k].id, score});
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            result.kept.push_back(rec);
            kept_vecs.push_back(std::move(v));
        }
    }
    return result;
}

} // namespace phishkit::corpus
