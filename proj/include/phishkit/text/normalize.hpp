#pragma once

#include <string>
#include <vector>

namespace phishkit::text {

// Word mode feeds the Word2Vec/mean pipeline and the non-distilled students:
// on top of the base cleanup it removes digits, turns punctuation into
// spaces and filters stopwords. WordPiece mode keeps surface forms for the
// teacher and the distilled student.
enum class TokenMode { Word, WordPiece };

// HTML tags stripped, basic entities decoded, lowercased, whitespace
// collapsed; word mode additionally applies digit removal, punctuation
// removal and the fixed stopword list. Empty output is legal and signals an
// effectively empty email.
std::string normalize_email(const std::string& raw, TokenMode mode);

bool is_stopword(const std::string& token);

// Whitespace split; in WordPiece mode punctuation characters split off as
// their own tokens, in Word mode they are already gone after normalization.
std::vector<std::string> split_tokens(const std::string& normalized,
                                      TokenMode mode);

} // namespace phishkit::text
