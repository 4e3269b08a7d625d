#include "phishkit/text/tokenize.hpp"

#include "phishkit/error.hpp"
#include "phishkit/text/normalize.hpp"

namespace phishkit::text {

TokenSequence tokenize_word(const std::string& normalized, const Vocab& vocab,
                            std::size_t max_len) {
    if (max_len == 0) throw ParameterError("tokenize_word: max_len must be > 0");
    TokenSequence seq;
    for (const auto& tok : split_tokens(normalized, TokenMode::Word)) {
        if (seq.ids.size() >= max_len) {
            seq.truncated = true;
            break;
        }
        seq.ids.push_back(vocab.id_of(tok));
    }
    return seq;
}

namespace {

// Greedy longest-match-first decomposition of one word. Returns false when
// some position has no matching piece, in which case the whole word is [UNK].
bool wordpiece_split(const std::string& word, const Vocab& vocab,
                     std::vector<std::size_t>& out) {
    std::size_t start = 0;
    std::vector<std::size_t> pieces;
    while (start < word.size()) {
        std::size_t end = word.size();
        bool matched = false;
        while (end > start) {
            std::string piece = word.substr(start, end - start);
            if (start > 0) piece = "##" + piece;
            if (vocab.contains(piece)) {
                pieces.push_back(vocab.id_of(piece));
                matched = true;
                break;
            }
            --end;
        }
        if (!matched) return false;
        start = end;
    }
    out.insert(out.end(), pieces.begin(), pieces.end());
    return true;
}

} // namespace

TokenSequence tokenize_wordpiece(const std::string& normalized,
                                 const Vocab& vocab, std::size_t max_len) {
    if (max_len < 2)
        throw ParameterError("tokenize_wordpiece: max_len must fit [CLS]/[SEP]");
    std::vector<std::size_t> body;
    for (const auto& word : split_tokens(normalized, TokenMode::WordPiece)) {
        std::vector<std::size_t> pieces;
        if (wordpiece_split(word, vocab, pieces)) {
            body.insert(body.end(), pieces.begin(), pieces.end());
        } else {
            body.push_back(Vocab::kUnk);
        }
    }
    TokenSequence seq;
    if (body.size() > max_len - 2) {
        body.resize(max_len - 2);
        seq.truncated = true;
    }
    seq.ids.reserve(body.size() + 2);
    seq.ids.push_back(Vocab::kCls);
    seq.ids.insert(seq.ids.end(), body.begin(), body.end());
    seq.ids.push_back(Vocab::kSep);
    return seq;
}

} // namespace phishkit::text
