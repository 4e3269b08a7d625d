#pragma once

#include <map>
#include <string>
#include <vector>

namespace phishkit::corpus {

enum class Label { Legitimate, Phishing };
enum class Source { Human, Llm };

std::string to_string(Label l);
std::string to_string(Source s);

struct EmailRecord {
    std::string id;
    std::string subject;
    std::string body;
    Label label = Label::Legitimate;
    Source source = Source::Human;
    std::map<std::string, std::string> meta;

    // subject + body, the text every downstream consumer sees.
    std::string text() const { return subject + " " + body; }
};

struct RejectedLine {
    std::size_t line = 0; // 1-based
    std::string reason;
};

struct LoadResult {
    std::vector<EmailRecord> records;
    std::vector<RejectedLine> rejected;
};

// JSON-lines with fields exactly id, subject, body, label, source, meta.
// Malformed JSON raises an IoError naming the line; records that violate the
// schema (unknown label/source, empty body after normalization) are rejected
// with their line numbers.
LoadResult load_corpus(const std::string& path);
void save_corpus(const std::vector<EmailRecord>& records,
                 const std::string& path);

} // namespace phishkit::corpus
