#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "phishkit/text/vocab.hpp"

namespace phishkit::text {

constexpr std::size_t kMaxSequenceLength = 512;

struct TokenSequence {
    std::vector<std::size_t> ids;
    bool truncated = false;
};

// Whitespace/punctuation split over normalized word-mode text; OOV -> [UNK];
// no [CLS]/[SEP]; truncates at max_len.
TokenSequence tokenize_word(const std::string& normalized, const Vocab& vocab,
                            std::size_t max_len = kMaxSequenceLength);

// Greedy longest-match-first subword tokenization with "##" continuation
// pieces; a word with no decomposition becomes a single [UNK]. Output always
// starts with [CLS], ends with [SEP] and never exceeds max_len ids.
TokenSequence tokenize_wordpiece(const std::string& normalized,
                                 const Vocab& vocab,
                                 std::size_t max_len = kMaxSequenceLength);

} // namespace phishkit::text
