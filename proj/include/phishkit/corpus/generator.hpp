#pragma once

#include <cstdint>

#include "phishkit/corpus/record.hpp"

namespace phishkit::corpus {

// Deterministic template generator standing in for the real-world corpora
// and the LLM generation pipeline. The human register writes overt phishing
// (crude cues, typo'd key words, odd URLs) and plain office mail; the llm
// register writes smoothed paraphrases on the same topics, so llm-phishing
// is lexically much closer to legitimate mail than human-phishing is.
struct GenConfig {
    std::size_t n_per_cell = 500;
    std::uint64_t seed = 7;
    // Caps the slot pools (names, companies, ...) to control lexical variety.
    std::size_t vocab_size = 64;
    bool human_register = true;
    bool llm_register = true;
};

std::vector<EmailRecord> generate_synthetic_corpus(const GenConfig& cfg);

} // namespace phishkit::corpus
