#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "phishkit/models/graph.hpp"
#include "phishkit/models/logits.hpp"
#include "phishkit/models/runner.hpp"
#include "phishkit/numerics/rng.hpp"

using namespace phishkit;
using namespace phishkit::models;
using numerics::Rng;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

TokenBatch random_batch(std::size_t batch, std::size_t steps,
                        std::size_t vocab, std::uint64_t seed,
                        bool wrapped = false) {
    Rng rng(seed);
    std::vector<text::TokenSequence> seqs(batch);
    for (auto& s : seqs) {
        const std::size_t len = 2 + rng.below(steps - 2);
        if (wrapped) s.ids.push_back(text::Vocab::kCls);
        for (std::size_t t = 0; t < len; ++t)
            s.ids.push_back(4 + rng.below(vocab - 4));
        if (wrapped) s.ids.push_back(text::Vocab::kSep);
    }
    return make_token_batch(seqs, steps + 2);
}

} // namespace

TEST_CASE("kd_student paper configuration lands in the 4.2M-4.8M band") {
    ModelGraph m(ModelConfig::paper_default(ModelKind::KdStudent), 1);
    const std::size_t count = param_count(m);
    CHECK(count >= 4200000);
    CHECK(count <= 4800000);
    // embedding 30000x128, two lstm directions, 4 heads of 256x64 q/k/v,
    // 256x256 output projection, scalar head
    CHECK(count == 3840000 + 2 * 4 * ((128 + 128) * 128 + 128) +
                       4 * 3 * 256 * 64 + 256 * 256 + 256 + 256 + 1);
}

TEST_CASE("lstm parameter count matches the closed form") {
    ModelConfig cfg = ModelConfig::paper_default(ModelKind::Lstm);
    cfg.vocab_size = 50;
    cfg.embed_dim = 10;
    cfg.hidden = 7;
    ModelGraph m(cfg, 3);
    const std::size_t lstm_count = 4 * ((10 + 7) * 7 + 7);
    CHECK(m.param_count() == 50 * 10 + lstm_count + 7 + 1);
    CHECK(m.param_count_non_embedding() == lstm_count + 7 + 1);
}

TEST_CASE("teacher trunk outweighs the student trunk but stays under 2M") {
    ModelGraph teacher(ModelConfig::paper_default(ModelKind::TinyTeacher), 1);
    ModelGraph student(ModelConfig::paper_default(ModelKind::KdStudent), 1);
    CHECK(teacher.param_count_non_embedding() < 2000000);
    CHECK(teacher.param_count_non_embedding() >
          student.param_count_non_embedding());
}

TEST_CASE("same seed builds identical parameters") {
    ModelConfig cfg = ModelConfig::desk_default(ModelKind::BilstmMh);
    cfg.vocab_size = 100;
    ModelGraph a(cfg, 42), b(cfg, 42), c(cfg, 43);
    for (const auto& [name, t] : a.params()) {
        CHECK(t.data() == b.params().at(name).data());
    }
    bool any_diff = false;
    for (const auto& [name, t] : a.params())
        any_diff = any_diff || t.data() != c.params().at(name).data();
    CHECK(any_diff);
}

TEST_CASE("student forward emits probabilities strictly inside (0,1)") {
    ModelConfig cfg = ModelConfig::desk_default(ModelKind::BilstmMh);
    cfg.vocab_size = 64;
    ModelGraph m(cfg, 5);
    TokenBatch batch = random_batch(6, 10, 64, 9);
    auto probs = m.predict_proba(batch);
    REQUIRE(probs.size() == 6);
    for (double p : probs) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("teacher with zero layers is degenerate but legal") {
    ModelConfig cfg = ModelConfig::desk_default(ModelKind::TinyTeacher);
    cfg.vocab_size = 64;
    cfg.layers = 0;
    ModelGraph m(cfg, 2);
    TokenBatch batch = random_batch(3, 8, 64, 1, /*wrapped=*/true);
    auto probs = m.predict_proba(batch);
    for (double p : probs) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("eval-mode forward is deterministic") {
    ModelConfig cfg = ModelConfig::desk_default(ModelKind::TinyTeacher);
    cfg.vocab_size = 64;
    ModelGraph m(cfg, 7);
    TokenBatch batch = random_batch(4, 9, 64, 3, true);
    auto a = m.predict_proba(batch);
    auto b = m.predict_proba(batch);
    CHECK(a == b);
}

TEST_CASE("embedding transfer copies the table bitwise") {
    ModelConfig tc = ModelConfig::desk_default(ModelKind::TinyTeacher);
    tc.vocab_size = 80;
    ModelConfig sc = ModelConfig::desk_default(ModelKind::KdStudent);
    sc.vocab_size = 80;
    sc.embed_dim = tc.embed_dim;
    ModelGraph teacher(tc, 11), student(sc, 12);
    CHECK(student.embedding().data() != teacher.embedding().data());
    transfer_embeddings(student, teacher);
    CHECK(student.embedding().data() == teacher.embedding().data());

    ModelConfig bad = sc;
    bad.vocab_size = 81;
    ModelGraph mismatched(bad, 13);
    CHECK_THROWS_AS(transfer_embeddings(mismatched, teacher), ContractError);
}

TEST_CASE("checkpoint round trip reproduces eval logits bitwise") {
    ModelConfig cfg = ModelConfig::desk_default(ModelKind::BilstmSh);
    cfg.vocab_size = 60;
    ModelGraph m(cfg, 21);
    TokenBatch batch = random_batch(5, 12, 60, 8);
    auto before = m.predict_proba(batch);
    const std::string path = tmp_path("phishkit_model_ckpt.bin");
    m.save(path);
    ModelGraph loaded = ModelGraph::load(path);
    CHECK(loaded.config().kind == cfg.kind);
    auto after = loaded.predict_proba(batch);
    CHECK(before == after);
    std::remove(path.c_str());
}

TEST_CASE("teacher logits CSV round trip and validation") {
    TeacherLogits t;
    t.logits["a"] = {0.25, -1.5};
    t.logits["b"] = {2.0, 0.125};
    const std::string path = tmp_path("phishkit_logits.csv");
    save_teacher_logits(t, path);
    TeacherLogits loaded = load_teacher_logits(path);
    CHECK_FALSE(loaded.single_logit);
    CHECK(loaded.logits == t.logits);

    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("id,z\nx,0.5\ny,-2\n", f);
        std::fclose(f);
    }
    TeacherLogits single = load_teacher_logits(path);
    CHECK(single.single_logit);
    CHECK(single.logits.at("x") == std::array<double, 2>{0.0, 0.5});
    CHECK(single.missing({"x", "q", "r"}).size() == 2);

    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("id,z\nx,0.5\nx,1.5\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_teacher_logits(path), IoError);
    std::remove(path.c_str());
}

TEST_CASE("inference runner mirrors graph forward") {
    for (ModelKind kind : {ModelKind::Lstm, ModelKind::Bilstm,
                           ModelKind::BilstmSh, ModelKind::BilstmMh,
                           ModelKind::TinyTeacher}) {
        CAPTURE(to_string(kind));
        ModelConfig cfg = ModelConfig::desk_default(kind);
        cfg.vocab_size = 64;
        ModelGraph m(cfg, 31);
        TokenBatch batch =
            random_batch(4, 10, 64, 17, kind == ModelKind::TinyTeacher);
        auto graph_probs = m.predict_proba(batch);
        InferenceRunner<double> r64(m);
        auto run64 = r64.predict_proba(batch);
        InferenceRunner<float> r32(m);
        auto run32 = r32.predict_proba(batch);
        for (std::size_t i = 0; i < graph_probs.size(); ++i) {
            CHECK(std::abs(run64[i] - graph_probs[i]) < 1e-12);
            CHECK(std::abs(run32[i] - graph_probs[i]) < 1e-3);
        }
    }
}

TEST_CASE("make_token_batch pads, masks and caps") {
    std::vector<text::TokenSequence> seqs(3);
    seqs[0].ids = {5, 6, 7};
    seqs[1].ids = {8};
    seqs[2].ids = {};
    TokenBatch b = make_token_batch(seqs, 8);
    CHECK(b.batch == 3);
    CHECK(b.steps == 3);
    CHECK(b.ids[0 * 3 + 2] == 7);
    CHECK(b.mask[1 * 3 + 0] == 1.0);
    CHECK(b.mask[1 * 3 + 1] == 0.0);
    CHECK(b.ids[1 * 3 + 1] == text::Vocab::kPad);
    // empty sequence falls back to a single [UNK]
    CHECK(b.ids[2 * 3 + 0] == text::Vocab::kUnk);
    CHECK(b.mask[2 * 3 + 0] == 1.0);

    seqs[0].ids.assign(50, 9);
    TokenBatch capped = make_token_batch(seqs, 16);
    CHECK(capped.steps == 16);
}
