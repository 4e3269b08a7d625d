#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phishkit/corpus/record.hpp"

namespace phishkit::evalbench {

// The five training/testing protocols. orig maps to human-written mail, gen
// to llm-written mail; mixture trains and tests on both.
struct ScenarioSpec {
    enum class Name { OrigOrig, GenGen, OrigGen, GenOrig, Mixture };
    Name name = Name::Mixture;
    std::optional<corpus::Source> train_source; // nullopt = both
    std::optional<corpus::Source> test_source;

    static ScenarioSpec make(Name name);
    static ScenarioSpec parse(const std::string& name);
    static const std::vector<std::string>& names();
    std::string str() const;
};

struct ScenarioPools {
    std::vector<std::size_t> train_pool; // indices into the corpus
    std::vector<std::size_t> test_pool;
    bool shared = false; // same pool (in-distribution or mixture)
};

// Filters the corpus by source per the spec. Cross-distribution scenarios
// train on one source's pool and evaluate on the other's; when the pools
// differ in size they are subsampled (per seed) to a common size so metric
// comparisons share sample counts.
ScenarioPools scenario_split(const std::vector<corpus::EmailRecord>& records,
                             const ScenarioSpec& spec, std::uint64_t seed);

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

struct FoldPlan {
    std::vector<Fold> folds;
};

// Stratified k-fold with a 72/8/20 composition: fold f's test set is the
// f-th per-class 20% slice of a seeded shuffle; the remaining 80% splits
// 90/10 into train/val. Indices refer to positions in `labels`.
FoldPlan stratified_kfold(const std::vector<int>& labels, std::size_t k = 5,
                          std::array<double, 3> ratios = {0.72, 0.08, 0.20},
                          std::uint64_t seed = 1);

} // namespace phishkit::evalbench
