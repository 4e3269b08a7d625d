#pragma once

#include <string>
#include <vector>

#include "phishkit/models/graph.hpp"

namespace phishkit::evalbench {

struct BenchConfig {
    std::size_t batch_size = 32;
    std::size_t seq_len = 48;
    std::size_t repeats = 30;     // timed batches (>= 30 per the protocol)
    std::size_t warmup = 3;       // untimed batches beforehand
    std::size_t train_batches = 8; // batches in the timed training epoch
    bool f32 = false;
    std::uint64_t seed = 1;
};

struct BenchReport {
    std::string model;
    std::size_t params = 0;
    double train_seconds = 0.0; // one training epoch over train_batches
    double test_seconds = 0.0;  // total over the timed batches
    double p50_ms = 0.0;        // per-batch eval latency percentiles
    double p95_ms = 0.0;
    std::string mode; // f64 or f32
};

// Wall-clock per-batch eval latency (median/p95 over `repeats` batches after
// warmup, single-threaded) plus one timed training epoch. Reports come back
// sorted by p50 latency.
std::vector<BenchReport> benchmark(std::vector<models::ModelGraph*> graphs,
                                   const BenchConfig& cfg);

// CSV columns: model,params,train_s,test_s,p50_ms,p95_ms,mode.
void save_bench_csv(const std::vector<BenchReport>& reports,
                    const std::string& path);

} // namespace phishkit::evalbench
