#include "phishkit/text/normalize.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace phishkit::text {

namespace {

// Fixed English stopword list, applied only in word mode.
const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a",        "about",   "above",   "after",    "again",    "against",
        "all",      "am",      "an",      "and",      "any",      "are",
        "as",       "at",      "be",      "because",  "been",     "before",
        "being",    "below",   "between", "both",     "but",      "by",
        "can",      "did",     "do",      "does",     "doing",    "down",
        "during",   "each",    "few",     "for",      "from",     "further",
        "had",      "has",     "have",    "having",   "he",       "her",
        "here",     "hers",    "herself", "him",      "himself",  "his",
        "how",      "i",       "if",      "in",       "into",     "is",
        "it",       "its",     "itself",  "just",     "me",       "more",
        "most",     "my",      "myself",  "no",       "nor",      "not",
        "now",      "of",      "off",     "on",       "once",     "only",
        "or",       "other",   "our",     "ours",     "ourselves","out",
        "over",     "own",     "same",    "she",      "should",   "so",
        "some",     "such",    "than",    "that",     "the",      "their",
        "theirs",   "them",    "themselves", "then",  "there",    "these",
        "they",     "this",    "those",   "through",  "to",       "too",
        "under",    "until",   "up",      "very",     "was",      "we",
        "were",     "what",    "when",    "where",    "which",    "while",
        "who",      "whom",    "why",     "will",     "with",     "you",
        "your",     "yours",   "yourself","yourselves",
    };
    return words;
}

std::string strip_html(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_tag = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '<') {
            in_tag = true;
            out.push_back(' ');
        } else if (c == '>') {
            in_tag = false;
        } else if (!in_tag) {
            out.push_back(c);
        }
    }
    return out;
}

std::string decode_entities(const std::string& s) {
    static const std::array<std::pair<const char*, char>, 6> table = {{
        {"&amp;", '&'},
        {"&lt;", '<'},
        {"&gt;", '>'},
        {"&nbsp;", ' '},
        {"&quot;", '"'},
        {"&#39;", '\''},
    }};
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        bool matched = false;
        if (s[i] == '&') {
            for (const auto& [name, repl] : table) {
                const std::size_t len = std::char_traits<char>::length(name);
                if (s.compare(i, len, name) == 0) {
                    out.push_back(repl);
                    i += len;
                    matched = true;
                    break;
                }
            }
        }
        if (!matched) out.push_back(s[i++]);
    }
    return out;
}

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }
bool is_alpha(unsigned char c) { return std::isalpha(c) != 0; }

std::string collapse_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (unsigned char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

} // namespace

bool is_stopword(const std::string& token) {
    return stopwords().count(token) > 0;
}

std::string normalize_email(const std::string& raw, TokenMode mode) {
    std::string s = decode_entities(strip_html(raw));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    if (mode == TokenMode::Word) {
        std::string filtered;
        filtered.reserve(s.size());
        for (unsigned char c : s) {
            if (is_digit(c)) continue;
            if (is_alpha(c) || is_space(c)) {
                filtered.push_back(static_cast<char>(c));
            } else {
                filtered.push_back(' ');
            }
        }
        s = collapse_whitespace(filtered);
        std::string kept;
        kept.reserve(s.size());
        std::size_t start = 0;
        while (start <= s.size()) {
            std::size_t end = s.find(' ', start);
            if (end == std::string::npos) end = s.size();
            const std::string tok = s.substr(start, end - start);
            if (!tok.empty() && !is_stopword(tok)) {
                if (!kept.empty()) kept.push_back(' ');
                kept += tok;
            }
            if (end == s.size()) break;
            start = end + 1;
        }
        return kept;
    }
    return collapse_whitespace(s);
}

std::vector<std::string> split_tokens(const std::string& normalized,
                                      TokenMode mode) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    for (unsigned char c : normalized) {
        if (is_space(c)) {
            flush();
        } else if (mode == TokenMode::WordPiece && !is_alpha(c) && !is_digit(c)) {
            flush();
            out.emplace_back(1, static_cast<char>(c));
        } else if (mode == TokenMode::Word && !is_alpha(c) && !is_digit(c)) {
            flush(); // punctuation is a delimiter at word level
        } else {
            cur.push_back(static_cast<char>(c));
        }
    }
    flush();
    return out;
}

} // namespace phishkit::text
