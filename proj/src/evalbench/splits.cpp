#include "phishkit/evalbench/splits.hpp"

#include <algorithm>
#include <cmath>

#include "phishkit/error.hpp"
#include "phishkit/numerics/rng.hpp"

namespace phishkit::evalbench {

using corpus::Source;
using numerics::Rng;

ScenarioSpec ScenarioSpec::make(Name name) {
    ScenarioSpec s;
    s.name = name;
    switch (name) {
        case Name::OrigOrig:
            s.train_source = Source::Human;
            s.test_source = Source::Human;
            break;
        case Name::GenGen:
            s.train_source = Source::Llm;
            s.test_source = Source::Llm;
            break;
        case Name::OrigGen:
            s.train_source = Source::Human;
            s.test_source = Source::Llm;
            break;
        case Name::GenOrig:
            s.train_source = Source::Llm;
            s.test_source = Source::Human;
            break;
        case Name::Mixture:
            break; // both sides use both sources
    }
    return s;
}

const std::vector<std::string>& ScenarioSpec::names() {
    static const std::vector<std::string> all = {"orig_orig", "gen_gen",
                                                 "orig_gen", "gen_orig",
                                                 "mixture"};
    return all;
}

ScenarioSpec ScenarioSpec::parse(const std::string& name) {
    if (name == "orig_orig") return make(Name::OrigOrig);
    if (name == "gen_gen") return make(Name::GenGen);
    if (name == "orig_gen") return make(Name::OrigGen);
    if (name == "gen_orig") return make(Name::GenOrig);
    if (name == "mixture") return make(Name::Mixture);
    std::string valid;
    for (const auto& n : names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ParameterError("unknown scenario \"" + name + "\" (valid: " + valid +
                         ")");
}

std::string ScenarioSpec::str() const {
    switch (name) {
        case Name::OrigOrig: return "orig_orig";
        case Name::GenGen: return "gen_gen";
        case Name::OrigGen: return "orig_gen";
        case Name::GenOrig: return "gen_orig";
        case Name::Mixture: return "mixture";
    }
    return "?";
}

namespace {

std::vector<std::size_t> filter_by_source(
    const std::vector<corpus::EmailRecord>& records,
    std::optional<Source> source) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (!source || records[i].source == *source) out.push_back(i);
    return out;
}

void check_cells(const std::vector<corpus::EmailRecord>& records,
                 const std::vector<std::size_t>& pool, const char* which) {
    bool has_phish = false, has_legit = false;
    for (std::size_t i : pool) {
        if (records[i].label == corpus::Label::Phishing) has_phish = true;
        else has_legit = true;
    }
    if (pool.empty() || !has_phish || !has_legit)
        throw ParameterError(std::string("scenario_split: ") + which +
                             " pool lacks a (label, source) cell");
}

// Per-seed subsample to `target` records, stratified by label.
std::vector<std::size_t> subsample(
    const std::vector<corpus::EmailRecord>& records,
    std::vector<std::size_t> pool, std::size_t target, Rng& rng) {
    if (pool.size() <= target) return pool;
    std::vector<std::size_t> phish, legit;
    for (std::size_t i : pool)
        (records[i].label == corpus::Label::Phishing ? phish : legit)
            .push_back(i);
    rng.shuffle(phish);
    rng.shuffle(legit);
    const double share = double(phish.size()) / double(pool.size());
    std::size_t n_phish = std::min(phish.size(),
                                   std::size_t(std::llround(share * double(target))));
    std::size_t n_legit = std::min(legit.size(), target - n_phish);
    std::vector<std::size_t> out(phish.begin(), phish.begin() + n_phish);
    out.insert(out.end(), legit.begin(), legit.begin() + n_legit);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

ScenarioPools scenario_split(const std::vector<corpus::EmailRecord>& records,
                             const ScenarioSpec& spec, std::uint64_t seed) {
    ScenarioPools pools;
    pools.train_pool = filter_by_source(records, spec.train_source);
    pools.test_pool = filter_by_source(records, spec.test_source);
    pools.shared = spec.train_source == spec.test_source;
    check_cells(records, pools.train_pool, "train");
    if (!pools.shared) {
        check_cells(records, pools.test_pool, "test");
        const std::size_t target =
            std::min(pools.train_pool.size(), pools.test_pool.size());
        Rng rng(numerics::derive_seed(seed, 0x73706c74ULL));
        pools.train_pool = subsample(records, pools.train_pool, target, rng);
        pools.test_pool = subsample(records, pools.test_pool, target, rng);
    }
    return pools;
}

FoldPlan stratified_kfold(const std::vector<int>& labels, std::size_t k,
                          std::array<double, 3> ratios, std::uint64_t seed) {
    if (k < 2) throw ParameterError("stratified_kfold: k must be >= 2");
    const double ratio_sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(ratio_sum - 1.0) > 1e-9)
        throw ParameterError("stratified_kfold: ratios must sum to 1");

    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i] ? 1 : 0].push_back(i);
    Rng rng(numerics::derive_seed(seed, 0x6b666f6cULL));
    for (auto& cls : by_class) {
        if (!cls.empty() && cls.size() < k)
            throw ParameterError("stratified_kfold: a class has " +
                                 std::to_string(cls.size()) +
                                 " samples, fewer than k=" + std::to_string(k));
        rng.shuffle(cls);
    }

    FoldPlan plan;
    plan.folds.resize(k);
    const double val_share = ratios[1] / (ratios[0] + ratios[1]);
    for (const auto& cls : by_class) {
        if (cls.empty()) continue;
        const std::size_t n = cls.size();
        // contiguous test blocks; the first n%k blocks get one extra sample
        std::vector<std::size_t> block_start(k + 1, 0);
        for (std::size_t f = 0; f < k; ++f)
            block_start[f + 1] = block_start[f] + n / k + (f < n % k ? 1 : 0);
        for (std::size_t f = 0; f < k; ++f) {
            auto& fold = plan.folds[f];
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < n; ++i) {
                if (i >= block_start[f] && i < block_start[f + 1])
                    fold.test.push_back(cls[i]);
                else
                    rest.push_back(cls[i]);
            }
            const std::size_t n_val =
                std::size_t(std::llround(val_share * double(rest.size())));
            for (std::size_t i = 0; i < rest.size(); ++i) {
                if (i < n_val)
                    fold.val.push_back(rest[i]);
                else
                    fold.train.push_back(rest[i]);
            }
        }
    }
    return plan;
}

} // namespace phishkit::evalbench
