#include "phishkit/evalbench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include "phishkit/error.hpp"
#include "phishkit/models/runner.hpp"
#include "phishkit/numerics/rng.hpp"
#include "phishkit/training/train.hpp"

namespace phishkit::evalbench {

using models::ModelGraph;
using models::TokenBatch;
using numerics::Rng;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

TokenBatch synthetic_batch(const models::ModelConfig& cfg,
                           const BenchConfig& bc, Rng& rng) {
    std::vector<text::TokenSequence> seqs(bc.batch_size);
    const std::size_t len = std::min(bc.seq_len, cfg.max_len);
    for (auto& s : seqs) {
        const bool wrapped = cfg.kind == models::ModelKind::TinyTeacher ||
                             cfg.kind == models::ModelKind::KdStudent;
        if (wrapped) s.ids.push_back(text::Vocab::kCls);
        const std::size_t body = len > 2 ? len - 2 : 1;
        for (std::size_t t = 0; t < body; ++t)
            s.ids.push_back(text::Vocab::kReserved +
                            rng.below(cfg.vocab_size - text::Vocab::kReserved));
        if (wrapped) s.ids.push_back(text::Vocab::kSep);
    }
    return models::make_token_batch(seqs, cfg.max_len);
}

training::Dataset synthetic_train_set(const models::ModelConfig& cfg,
                                      const BenchConfig& bc, Rng& rng) {
    training::Dataset d;
    const std::size_t n = bc.train_batches * bc.batch_size;
    const std::size_t len = std::min(bc.seq_len, cfg.max_len);
    for (std::size_t i = 0; i < n; ++i) {
        text::TokenSequence s;
        for (std::size_t t = 0; t < len; ++t)
            s.ids.push_back(text::Vocab::kReserved +
                            rng.below(cfg.vocab_size - text::Vocab::kReserved));
        d.seqs.push_back(std::move(s));
        d.labels.push_back(int(i % 2));
        d.ids.push_back("bench-" + std::to_string(i));
    }
    return d;
}

template <typename S>
void time_inference(const ModelGraph& graph, const BenchConfig& bc,
                    BenchReport& report) {
    models::InferenceRunner<S> runner(graph);
    Rng rng(numerics::derive_seed(bc.seed, 0xbe4cULL));
    std::vector<TokenBatch> batches;
    for (std::size_t i = 0; i < bc.warmup + bc.repeats; ++i)
        batches.push_back(synthetic_batch(graph.config(), bc, rng));
    for (std::size_t i = 0; i < bc.warmup; ++i)
        runner.predict_proba(batches[i]);
    std::vector<double> ms;
    double total = 0.0;
    for (std::size_t i = bc.warmup; i < batches.size(); ++i) {
        const auto start = Clock::now();
        runner.predict_proba(batches[i]);
        const double s = seconds_since(start);
        ms.push_back(s * 1e3);
        total += s;
    }
    std::sort(ms.begin(), ms.end());
    auto pct = [&](double q) {
        const double pos = q * double(ms.size() - 1);
        const std::size_t lo = std::size_t(pos);
        const double frac = pos - double(lo);
        return lo + 1 < ms.size() ? ms[lo] * (1 - frac) + ms[lo + 1] * frac
                                  : ms[lo];
    };
    report.test_seconds = total;
    report.p50_ms = pct(0.50);
    report.p95_ms = pct(0.95);
}

} // namespace

std::vector<BenchReport> benchmark(std::vector<ModelGraph*> graphs,
                                   const BenchConfig& cfg) {
    if (cfg.repeats < 1) throw ParameterError("benchmark: repeats must be >= 1");
    std::vector<BenchReport> reports;
    for (ModelGraph* graph : graphs) {
        if (!graph) throw ParameterError("benchmark: null model");
        BenchReport report;
        report.model = to_string(graph->config().kind);
        report.params = graph->param_count();
        report.mode = cfg.f32 ? "f32" : "f64";

        if (cfg.f32)
            time_inference<float>(*graph, cfg, report);
        else
            time_inference<double>(*graph, cfg, report);

        if (cfg.train_batches > 0) {
            Rng rng(numerics::derive_seed(cfg.seed, 0x7261ULL));
            training::Dataset train_set =
                synthetic_train_set(graph->config(), cfg, rng);
            training::TrainConfig tc;
            tc.epochs = 1;
            tc.batch_size = cfg.batch_size;
            tc.seed = cfg.seed;
            // time a fresh instance so the benchmarked model stays untouched
            models::ModelGraph trainee(graph->config(), cfg.seed);
            const auto start = Clock::now();
            training::train(trainee, train_set, {}, tc);
            report.train_seconds = seconds_since(start);
        }
        reports.push_back(report);
    }
    std::sort(reports.begin(), reports.end(),
              [](const BenchReport& a, const BenchReport& b) {
                  return a.p50_ms < b.p50_ms;
              });
    return reports;
}

void save_bench_csv(const std::vector<BenchReport>& reports,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write bench csv " + path);
    out << "model,params,train_s,test_s,p50_ms,p95_ms,mode\n";
    char buf[200];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof(buf), "%s,%zu,%.4f,%.4f,%.4f,%.4f,%s\n",
                      r.model.c_str(), r.params, r.train_seconds,
                      r.test_seconds, r.p50_ms, r.p95_ms, r.mode.c_str());
        out << buf;
    }
}

} // namespace phishkit::evalbench
