#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "phishkit/corpus/record.hpp"

namespace phishkit::corpus {

// Sparse TF-IDF vector over a fixed vocabulary snapshot. Weights are
// tf * idf with tf = raw count and the smoothed idf = ln((1+N)/(1+df)) + 1.
struct TfIdfVector {
    std::uint64_t snapshot = 0;
    std::unordered_map<std::size_t, double> weights; // term id -> weight
    double norm = 0.0;
    bool empty_doc = false; // no known terms
};

class TfIdfVectorizer {
  public:
    // Fits term document frequencies over word-mode normalized text.
    static TfIdfVectorizer fit(const std::vector<std::string>& docs);
    static TfIdfVectorizer fit_records(const std::vector<EmailRecord>& records);

    TfIdfVector transform(const std::string& doc) const;

    std::uint64_t snapshot() const { return snapshot_; }
    std::size_t vocab_size() const { return idf_.size(); }
    double idf_of(const std::string& term) const;

  private:
    std::uint64_t snapshot_ = 0;
    std::unordered_map<std::string, std::size_t> term_ids_;
    std::vector<double> idf_;
};

// dot(a,b) / (|a| |b|); zero-norm operands compare as 0. Vectors must come
// from the same vectorizer snapshot.
double cosine_similarity(const TfIdfVector& a, const TfIdfVector& b);

struct DistributionSummary {
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::size_t count = 0;
};

struct SimilarityRow {
    std::string legit_id;
    std::string vs_class; // "human" or "llm"
    double mean_cosine = 0.0;
};

struct SimilarityReport {
    DistributionSummary vs_human;
    DistributionSummary vs_llm;
    std::vector<SimilarityRow> rows;
};

// Per legitimate email, its mean cosine similarity against each phishing
// set, plus distribution summaries over those means.
SimilarityReport similarity_analysis(const std::vector<EmailRecord>& legit,
                                     const std::vector<EmailRecord>& phish_human,
                                     const std::vector<EmailRecord>& phish_llm);

void save_similarity_csv(const SimilarityReport& report,
                         const std::string& path);

struct DedupPair {
    std::string removed_id;
    std::string kept_id;
    double score = 0.0;
};

struct DedupResult {
    std::vector<EmailRecord> kept;
    std::vector<DedupPair> removed;
};

// Greedy scan in input order: a record is dropped when its cosine similarity
// to any kept record reaches the threshold. Threshold in (0, 1].
DedupResult dedup(const std::vector<EmailRecord>& records, double threshold);

} // namespace phishkit::corpus
