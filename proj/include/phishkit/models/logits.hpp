#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

namespace phishkit::models {

// Frozen teacher outputs keyed by record id, imported from CSV so any
// external teacher can drive distillation. Single-logit records are viewed
// as the 2-logit pair (0, z) so the softmax temperature math is uniform.
struct TeacherLogits {
    std::map<std::string, std::array<double, 2>> logits;
    bool single_logit = false;

    bool contains(const std::string& id) const { return logits.count(id) > 0; }
    // ids from `required` that are missing here, capped at `limit`.
    std::vector<std::string> missing(const std::vector<std::string>& required,
                                     std::size_t limit = 20) const;
};

// CSV with header `id,z0,z1` or `id,z`. Duplicate ids are an error.
TeacherLogits load_teacher_logits(const std::string& path);
void save_teacher_logits(const TeacherLogits& logits, const std::string& path);

} // namespace phishkit::models
