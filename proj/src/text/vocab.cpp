#include "phishkit/text/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "phishkit/error.hpp"
#include "phishkit/text/normalize.hpp"

namespace phishkit::text {

Vocab::Vocab() {
    id_to_token_ = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
    for (std::size_t i = 0; i < id_to_token_.size(); ++i)
        token_to_id_[id_to_token_[i]] = i;
}

void Vocab::append(const std::string& token) {
    token_to_id_[token] = id_to_token_.size();
    id_to_token_.push_back(token);
}

Vocab Vocab::from_counts(
    const std::vector<std::pair<std::string, std::size_t>>& counts,
    std::size_t cap, std::size_t min_freq) {
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [tok, freq] : counts) {
        if (freq >= min_freq && !tok.empty()) kept.emplace_back(tok, freq);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocab v;
    for (const auto& [tok, freq] : kept) {
        (void)freq;
        if (v.size() >= cap) break; // cap counts the reserved entries
        if (!v.contains(tok)) v.append(tok);
    }
    return v;
}

bool Vocab::contains(const std::string& token) const {
    return token_to_id_.count(token) > 0;
}

std::size_t Vocab::id_of(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocab::token_of(std::size_t id) const {
    if (id >= id_to_token_.size())
        throw phishkit::ParameterError("vocab id " + std::to_string(id) +
                                       " out of range");
    return id_to_token_[id];
}

void Vocab::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw phishkit::IoError("cannot write vocab file " + path);
    for (std::size_t id = kReserved; id < id_to_token_.size(); ++id)
        out << id_to_token_[id] << "\n";
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw phishkit::IoError("cannot read vocab file " + path);
    Vocab v;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) v.append(line);
    }
    return v;
}

namespace {

std::map<std::string, std::size_t> count_tokens(
    const std::vector<std::string>& corpus, TokenMode mode) {
    std::map<std::string, std::size_t> counts;
    for (const auto& doc : corpus)
        for (const auto& tok : split_tokens(doc, mode)) ++counts[tok];
    return counts;
}

} // namespace

Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t cap,
                  std::size_t min_freq) {
    if (corpus.empty()) throw phishkit::ParameterError("build_vocab: empty corpus");
    auto counts = count_tokens(corpus, TokenMode::Word);
    std::vector<std::pair<std::string, std::size_t>> pairs(counts.begin(),
                                                           counts.end());
    return Vocab::from_counts(pairs, cap, min_freq);
}

Vocab build_wordpiece_vocab(const std::vector<std::string>& corpus,
                            std::size_t cap, std::size_t min_freq) {
    if (corpus.empty())
        throw phishkit::ParameterError("build_wordpiece_vocab: empty corpus");
    auto words = count_tokens(corpus, TokenMode::WordPiece);
    std::map<std::string, std::size_t> pieces = words;
    for (const auto& [word, freq] : words) {
        for (char c : word) {
            pieces[std::string(1, c)] += freq;
            pieces[std::string("##") + c] += freq;
        }
    }
    std::vector<std::pair<std::string, std::size_t>> pairs(pieces.begin(),
                                                           pieces.end());
    return Vocab::from_counts(pairs, cap, min_freq);
}

} // namespace phishkit::text
