#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phishkit/text/tokenize.hpp"

namespace phishkit::text {

// Dense V x d table of 64-bit floats; the [PAD] row stays frozen at zero.
struct EmbeddingTable {
    std::size_t dim = 0;
    std::vector<double> data; // row-major, rows() x dim

    std::size_t rows() const { return dim == 0 ? 0 : data.size() / dim; }
    const double* row(std::size_t r) const { return data.data() + r * dim; }
    double* row(std::size_t r) { return data.data() + r * dim; }

    // Text format: header "dim V" then V whitespace-separated rows, printed
    // with enough digits to round-trip doubles exactly.
    void save(const std::string& path) const;
    static EmbeddingTable load(const std::string& path);
};

struct Word2VecConfig {
    std::size_t dim = 100;
    std::size_t window = 4;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double lr = 0.025;
    std::uint64_t seed = 1;
    enum class Mode { SkipGram, Cbow } mode = Mode::SkipGram;
};

struct Word2VecResult {
    EmbeddingTable table;
    std::vector<double> epoch_loss; // mean negative-sampling loss per epoch
};

// Skip-gram (or CBOW) with negative sampling over token-id sequences.
// Deterministic under a fixed seed; negatives drawn from the unigram
// distribution raised to 3/4. [PAD] tokens are skipped and its row is zero.
Word2VecResult train_embeddings(const std::vector<TokenSequence>& corpus,
                                std::size_t vocab_size,
                                const Word2VecConfig& cfg);

// Element-wise mean of the non-[PAD] token rows. An all-[PAD] (or empty)
// sequence yields a zero vector and sets *all_pad when provided.
std::vector<double> email_vector_mean(const TokenSequence& seq,
                                      const EmbeddingTable& table,
                                      bool* all_pad = nullptr);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

} // namespace phishkit::text
