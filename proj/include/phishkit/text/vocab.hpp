#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace phishkit::text {

// Token inventory with four reserved ids. Non-reserved ids are assigned
// most-frequent-first with lexicographic tie-breaking; tokens below the
// minimum frequency are excluded. Size never exceeds the configured cap
// (which counts the reserved entries).
class Vocab {
  public:
    static constexpr std::size_t kPad = 0;
    static constexpr std::size_t kUnk = 1;
    static constexpr std::size_t kCls = 2;
    static constexpr std::size_t kSep = 3;
    static constexpr std::size_t kReserved = 4;
    static constexpr std::size_t kDefaultCap = 30000;

    Vocab();

    // Builds from pre-counted (token, frequency) pairs.
    static Vocab from_counts(
        const std::vector<std::pair<std::string, std::size_t>>& counts,
        std::size_t cap, std::size_t min_freq);

    std::size_t size() const { return id_to_token_.size(); }
    bool contains(const std::string& token) const;
    // Reserved-aware lookup; unknown tokens map to kUnk.
    std::size_t id_of(const std::string& token) const;
    const std::string& token_of(std::size_t id) const;

    // One token per line, line number = id - 4; reserved ids are implicit.
    void save(const std::string& path) const;
    static Vocab load(const std::string& path);

  private:
    void append(const std::string& token);
    std::unordered_map<std::string, std::size_t> token_to_id_;
    std::vector<std::string> id_to_token_;
};

// Whitespace-token vocabulary over normalized word-mode texts.
Vocab build_vocab(const std::vector<std::string>& corpus,
                  std::size_t cap = Vocab::kDefaultCap, std::size_t min_freq = 1);

// WordPiece inventory over normalized wordpiece-mode texts: frequent whole
// words plus single-character fallback pieces (both head and "##"
// continuation forms), so every word decomposes without [UNK] as long as its
// characters occur in the corpus.
Vocab build_wordpiece_vocab(const std::vector<std::string>& corpus,
                            std::size_t cap = Vocab::kDefaultCap,
                            std::size_t min_freq = 1);

} // namespace phishkit::text
