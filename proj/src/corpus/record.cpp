#include "phishkit/corpus/record.hpp"

#include <fstream>

#include <json.hpp>

#include "phishkit/error.hpp"
#include "phishkit/text/normalize.hpp"

namespace phishkit::corpus {

using nlohmann::ordered_json;

std::string to_string(Label l) {
    return l == Label::Phishing ? "phishing" : "legitimate";
}

std::string to_string(Source s) { return s == Source::Human ? "human" : "llm"; }

namespace {

bool parse_label(const std::string& s, Label& out) {
    if (s == "phishing") { out = Label::Phishing; return true; }
    if (s == "legitimate") { out = Label::Legitimate; return true; }
    return false;
}

bool parse_source(const std::string& s, Source& out) {
    if (s == "human") { out = Source::Human; return true; }
    if (s == "llm") { out = Source::Llm; return true; }
    return false;
}

} // namespace

LoadResult load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file " + path);
    LoadResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw IoError("corpus " + path + " line " + std::to_string(line_no) +
                          ": malformed JSON (" + e.what() + ")");
        }
        auto reject = [&](const std::string& reason) {
            result.rejected.push_back({line_no, reason});
        };
        if (!j.is_object() || !j.contains("id") || !j.contains("label") ||
            !j.contains("source") || !j.contains("body")) {
            reject("missing required field");
            continue;
        }
        EmailRecord rec;
        try {
            rec.id = j.at("id").get<std::string>();
            rec.subject = j.value("subject", std::string());
            rec.body = j.at("body").get<std::string>();
            if (!parse_label(j.at("label").get<std::string>(), rec.label)) {
                reject("unknown label \"" + j.at("label").get<std::string>() + "\"");
                continue;
            }
            if (!parse_source(j.at("source").get<std::string>(), rec.source)) {
                reject("unknown source \"" + j.at("source").get<std::string>() + "\"");
                continue;
            }
            if (j.contains("meta")) {
                for (auto& [k, v] : j.at("meta").items())
                    rec.meta[k] = v.get<std::string>();
            }
        } catch (const std::exception& e) {
            reject(std::string("bad field type: ") + e.what());
            continue;
        }
        if (text::normalize_email(rec.body, text::TokenMode::WordPiece).empty()) {
            reject("body empty after normalization");
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

void save_corpus(const std::vector<EmailRecord>& records,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write corpus file " + path);
    for (const auto& rec : records) {
        ordered_json j;
        j["id"] = rec.id;
        j["subject"] = rec.subject;
        j["body"] = rec.body;
        j["label"] = to_string(rec.label);
        j["source"] = to_string(rec.source);
        j["meta"] = ordered_json::object();
        for (const auto& [k, v] : rec.meta) j["meta"][k] = v;
        out << j.dump() << "\n";
    }
}

} // namespace phishkit::corpus
