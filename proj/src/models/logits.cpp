#include "phishkit/models/logits.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "phishkit/error.hpp"

namespace phishkit::models {

std::vector<std::string> TeacherLogits::missing(
    const std::vector<std::string>& required, std::size_t limit) const {
    std::vector<std::string> out;
    for (const auto& id : required) {
        if (!contains(id)) {
            out.push_back(id);
            if (out.size() >= limit) break;
        }
    }
    return out;
}

TeacherLogits load_teacher_logits(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read teacher logits " + path);
    std::string header;
    if (!std::getline(in, header))
        throw IoError("empty teacher logits file " + path);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    TeacherLogits out;
    if (header == "id,z") {
        out.single_logit = true;
    } else if (header != "id,z0,z1") {
        throw IoError("teacher logits " + path +
                      ": header must be `id,z0,z1` or `id,z`, got `" + header +
                      "`");
    }
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id, z0s, z1s;
        if (!std::getline(ss, id, ',') || !std::getline(ss, z0s, ','))
            throw IoError("teacher logits " + path + " line " +
                          std::to_string(line_no) + ": malformed row");
        std::array<double, 2> z{0.0, 0.0};
        try {
            if (out.single_logit) {
                z = {0.0, std::stod(z0s)};
            } else {
                if (!std::getline(ss, z1s, ','))
                    throw IoError("missing z1 column");
                z = {std::stod(z0s), std::stod(z1s)};
            }
        } catch (const std::exception&) {
            throw IoError("teacher logits " + path + " line " +
                          std::to_string(line_no) + ": malformed number");
        }
        if (!out.logits.emplace(id, z).second)
            throw IoError("teacher logits " + path + " line " +
                          std::to_string(line_no) + ": duplicate id \"" + id +
                          "\"");
    }
    return out;
}

void save_teacher_logits(const TeacherLogits& logits, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write teacher logits " + path);
    char buf[64];
    if (logits.single_logit) {
        out << "id,z\n";
        for (const auto& [id, z] : logits.logits) {
            std::snprintf(buf, sizeof(buf), "%.17g", z[1]);
            out << id << "," << buf << "\n";
        }
    } else {
        out << "id,z0,z1\n";
        for (const auto& [id, z] : logits.logits) {
            std::snprintf(buf, sizeof(buf), "%.17g,", z[0]);
            out << id << "," << buf;
            std::snprintf(buf, sizeof(buf), "%.17g", z[1]);
            out << buf << "\n";
        }
    }
}

} // namespace phishkit::models
