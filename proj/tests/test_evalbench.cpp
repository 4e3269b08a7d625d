#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "phishkit/corpus/generator.hpp"
#include "phishkit/evalbench/bench.hpp"
#include "phishkit/evalbench/metrics.hpp"
#include "phishkit/evalbench/scenario.hpp"
#include "phishkit/evalbench/splits.hpp"
#include "phishkit/numerics/rng.hpp"

using namespace phishkit;
using namespace phishkit::evalbench;
using numerics::Rng;

TEST_CASE("confusion counting") {
    auto cm = confusion({1, 1, 0}, {1, 1, 0});
    CHECK(cm.tp == 2);
    CHECK(cm.tn == 1);
    CHECK(cm.fp == 0);
    CHECK(cm.fn == 0);

    auto inv = confusion({0, 0, 1}, {1, 1, 0});
    CHECK(inv.tp == 0);
    CHECK(inv.tn == 0);
    CHECK(inv.fp == 1);
    CHECK(inv.fn == 2);

    auto built = confusion({1, 1, 1, 1, 0, 0, 0, 0, 0, 1},
                           {1, 1, 1, 0, 1, 0, 0, 0, 0, 0});
    CHECK(built.tp == 3);
    CHECK(built.fp == 2);
    CHECK(built.fn == 1);
    CHECK(built.tn == 4);

    CHECK_THROWS_AS(confusion({1}, {1, 0}), ContractError);
}

TEST_CASE("metrics oracle") {
    Metrics m = metrics(ConfusionMatrix{3, 1, 1, 5});
    CHECK(m.accuracy == doctest::Approx(0.8));
    CHECK(m.precision == doctest::Approx(0.75));
    CHECK(m.recall == doctest::Approx(0.75));
    CHECK(m.f1 == doctest::Approx(0.75));
    CHECK_FALSE(m.degenerate);

    Metrics perfect = metrics(ConfusionMatrix{5, 0, 0, 5});
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    Metrics degen = metrics(ConfusionMatrix{0, 0, 2, 3});
    CHECK(degen.precision == 0.0);
    CHECK(degen.degenerate);

    CHECK_THROWS_AS(metrics(ConfusionMatrix{}), ParameterError);
}

TEST_CASE("metrics agree with a brute-force per-sample counter") {
    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 5 + rng.below(60);
        std::vector<int> preds(n), labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = int(rng.below(2));
            labels[i] = int(rng.below(2));
        }
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0, correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (preds[i] == labels[i]) ++correct;
            if (preds[i] == 1 && labels[i] == 1) ++tp;
            if (preds[i] == 1 && labels[i] == 0) ++fp;
            if (preds[i] == 0 && labels[i] == 1) ++fn;
            if (preds[i] == 0 && labels[i] == 0) ++tn;
        }
        auto cm = confusion(preds, labels);
        CHECK(cm.tp == tp);
        CHECK(cm.fp == fp);
        CHECK(cm.fn == fn);
        CHECK(cm.tn == tn);
        Metrics m = metrics(cm);
        CHECK(m.accuracy == doctest::Approx(double(correct) / double(n)));
        const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
        const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
        CHECK(m.precision == doctest::Approx(p));
        CHECK(m.recall == doctest::Approx(r));
        CHECK(m.f1 == doctest::Approx(p + r > 0 ? 2 * p * r / (p + r) : 0.0));

        // permutation invariance
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        std::vector<int> preds2(n), labels2(n);
        for (std::size_t i = 0; i < n; ++i) {
            preds2[i] = preds[perm[i]];
            labels2[i] = labels[perm[i]];
        }
        Metrics m2 = metrics(confusion(preds2, labels2));
        CHECK(m2.accuracy == m.accuracy);
        CHECK(m2.f1 == m.f1);
    }
}

TEST_CASE("constant predictions score the majority-class share") {
    std::vector<int> labels = {1, 1, 1, 0, 0, 0, 0};
    std::vector<int> preds(labels.size(), 1);
    Metrics m = metrics(confusion(preds, labels));
    CHECK(m.accuracy == doctest::Approx(3.0 / 7.0));
}

TEST_CASE("weighted f1") {
    CHECK(weighted_f1({0.8, 0.6}, {10, 10}) == doctest::Approx(0.7));
    CHECK(weighted_f1({0.42}, {7}) == doctest::Approx(0.42));
    CHECK(weighted_f1({0.5, 0.5, 0.5}, {1, 100, 7}) == doctest::Approx(0.5));
    // lies between the class extremes
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> f1s = {rng.uniform(), rng.uniform()};
        std::vector<std::size_t> sup = {1 + rng.below(50), 1 + rng.below(50)};
        const double w = weighted_f1(f1s, sup);
        CHECK(w >= std::min(f1s[0], f1s[1]) - 1e-12);
        CHECK(w <= std::max(f1s[0], f1s[1]) + 1e-12);
    }
    // binary helper matches manual computation on the oracle matrix
    ConfusionMatrix cm{3, 1, 1, 5};
    Metrics pos = metrics(cm);
    Metrics neg = metrics(ConfusionMatrix{5, 1, 1, 3});
    CHECK(binary_weighted_f1(cm) ==
          doctest::Approx((4.0 * pos.f1 + 6.0 * neg.f1) / 10.0));
}

namespace {

std::vector<int> balanced_labels(std::size_t n, Rng& rng) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = int(i % 2);
    rng.shuffle(labels);
    return labels;
}

} // namespace

TEST_CASE("stratified kfold composition on a balanced 1000-sample pool") {
    Rng rng(3);
    auto labels = balanced_labels(1000, rng);
    FoldPlan plan = stratified_kfold(labels, 5, {0.72, 0.08, 0.20}, 9);
    REQUIRE(plan.folds.size() == 5);
    std::set<std::size_t> all_tests;
    for (const auto& fold : plan.folds) {
        CHECK(fold.train.size() == 720);
        CHECK(fold.val.size() == 80);
        CHECK(fold.test.size() == 200);
        // disjoint within the fold
        std::set<std::size_t> seen;
        for (auto idx : fold.train) seen.insert(idx);
        for (auto idx : fold.val) CHECK(seen.insert(idx).second);
        for (auto idx : fold.test) CHECK(seen.insert(idx).second);
        CHECK(seen.size() == 1000);
        // label balance within one sample
        auto count_pos = [&](const std::vector<std::size_t>& idx) {
            std::size_t c = 0;
            for (auto i : idx) c += labels[i];
            return c;
        };
        CHECK(std::llabs(2 * (long long)count_pos(fold.train) -
                         (long long)fold.train.size()) <= 2);
        CHECK(std::llabs(2 * (long long)count_pos(fold.val) -
                         (long long)fold.val.size()) <= 2);
        CHECK(std::llabs(2 * (long long)count_pos(fold.test) -
                         (long long)fold.test.size()) <= 2);
        for (auto idx : fold.test) all_tests.insert(idx);
    }
    CHECK(all_tests.size() == 1000); // test blocks partition the pool

    FoldPlan again = stratified_kfold(labels, 5, {0.72, 0.08, 0.20}, 9);
    CHECK(again.folds[2].train == plan.folds[2].train);
    CHECK(again.folds[4].test == plan.folds[4].test);
}

TEST_CASE("stratified kfold on small and awkward sizes") {
    Rng rng(4);
    auto labels = balanced_labels(100, rng);
    FoldPlan plan = stratified_kfold(labels, 5, {0.72, 0.08, 0.20}, 2);
    std::size_t test_total = 0;
    for (const auto& fold : plan.folds) {
        CHECK(std::llabs((long long)fold.train.size() - 72) <= 1);
        CHECK(std::llabs((long long)fold.val.size() - 8) <= 1);
        CHECK(std::llabs((long long)fold.test.size() - 20) <= 1);
        test_total += fold.test.size();
    }
    CHECK(test_total == 100);

    std::vector<int> tiny = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(stratified_kfold(tiny, 5, {0.72, 0.08, 0.20}, 1),
                    ParameterError);
}

TEST_CASE("scenario specs parse and filter pools") {
    corpus::GenConfig gc;
    gc.n_per_cell = 20;
    gc.seed = 3;
    auto records = corpus::generate_synthetic_corpus(gc);

    auto orig = scenario_split(records, ScenarioSpec::parse("orig_orig"), 1);
    CHECK(orig.shared);
    for (auto i : orig.train_pool)
        CHECK(records[i].source == corpus::Source::Human);
    CHECK(orig.train_pool.size() == 40);

    auto mix = scenario_split(records, ScenarioSpec::parse("mixture"), 1);
    CHECK(mix.train_pool.size() == records.size());

    auto cross = scenario_split(records, ScenarioSpec::parse("orig_gen"), 1);
    CHECK_FALSE(cross.shared);
    std::set<std::size_t> train_ids(cross.train_pool.begin(),
                                    cross.train_pool.end());
    for (auto i : cross.test_pool) CHECK(train_ids.count(i) == 0);
    CHECK(cross.train_pool.size() == cross.test_pool.size());

    CHECK_THROWS_AS(ScenarioSpec::parse("sideways"), ParameterError);

    // human-only corpus cannot serve a gen_orig split
    corpus::GenConfig human_only = gc;
    human_only.llm_register = false;
    auto human_records = corpus::generate_synthetic_corpus(human_only);
    CHECK_THROWS_AS(
        scenario_split(human_records, ScenarioSpec::parse("gen_orig"), 1),
        ParameterError);
}

TEST_CASE("run_scenario returns five fold rows plus a mean and reproduces") {
    corpus::GenConfig gc;
    gc.n_per_cell = 25;
    gc.seed = 5;
    auto records = corpus::generate_synthetic_corpus(gc);

    ScenarioRunConfig rc = ScenarioRunConfig::desk_default();
    rc.seed = 11;
    rc.vocab_cap = 800;
    rc.embed_dim = 12;
    rc.hidden = 8;
    rc.student_budget.epochs = 1;
    rc.student_budget.batch_size = 16;

    auto spec = ScenarioSpec::parse("mixture");
    ScenarioReport report =
        run_scenario(records, models::ModelKind::Bilstm, spec, rc);
    CHECK(report.folds.size() == 5);
    CHECK(report.model == "bilstm");
    CHECK(report.scenario == "mixture");
    CHECK(report.pool_size == records.size());
    CHECK(report.total_samples == records.size());
    CHECK(report.mean.acc >= 0.0);
    CHECK(report.mean.acc <= 1.0);

    ScenarioReport again =
        run_scenario(records, models::ModelKind::Bilstm, spec, rc);
    for (std::size_t f = 0; f < 5; ++f) {
        CHECK(report.folds[f].acc == again.folds[f].acc);
        CHECK(report.folds[f].weighted_f1 == again.folds[f].weighted_f1);
    }

    const std::string path =
        (std::filesystem::temp_directory_path() / "phishkit_metrics.csv").string();
    save_metrics_csv({report}, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "model,scenario,fold,acc,precision,recall,f1,weighted_f1");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 6); // 5 folds + mean
    std::remove(path.c_str());
}

TEST_CASE("benchmark reports params exactly and similar models time alike") {
    models::ModelConfig cfg = models::ModelConfig::desk_default(
        models::ModelKind::Bilstm);
    cfg.vocab_size = 200;
    models::ModelGraph a(cfg, 1), b(cfg, 2);
    BenchConfig bc;
    bc.batch_size = 8;
    bc.seq_len = 16;
    bc.repeats = 15;
    bc.train_batches = 1;
    auto reports = benchmark({&a, &b}, bc);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].params == a.param_count());
    CHECK(reports[1].params == b.param_count());
    CHECK(reports[0].p50_ms > 0.0);
    CHECK(reports[0].p50_ms <= reports[1].p50_ms); // sorted
    CHECK(reports[1].p50_ms / reports[0].p50_ms < 1.2);
    CHECK(reports[0].train_seconds > 0.0);

    const std::string path =
        (std::filesystem::temp_directory_path() / "phishkit_bench.csv").string();
    save_bench_csv(reports, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "model,params,train_s,test_s,p50_ms,p95_ms,mode");
    std::remove(path.c_str());
}
