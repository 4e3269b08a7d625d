#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "phishkit/evalbench/metrics.hpp"
#include "phishkit/training/distill.hpp"
#include "phishkit/training/train.hpp"

using namespace phishkit;
using namespace phishkit::training;
namespace ops = phishkit::numerics;
using models::ModelConfig;
using models::ModelGraph;
using models::ModelKind;
using numerics::Rng;
using numerics::Tensor;

namespace {

// Two disjoint token vocabularies: ids 4..8 for legitimate, 9..13 phishing.
Dataset separable_dataset(std::size_t n, std::uint64_t seed,
                          double flip_rate = 0.0) {
    Rng rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = int(i % 2);
        text::TokenSequence seq;
        const std::size_t base = label ? 9 : 4;
        const std::size_t len = 4 + rng.below(4);
        for (std::size_t t = 0; t < len; ++t)
            seq.ids.push_back(base + rng.below(5));
        d.seqs.push_back(seq);
        int train_label = label;
        if (flip_rate > 0.0 && rng.uniform() < flip_rate) train_label = 1 - label;
        d.labels.push_back(train_label);
        d.ids.push_back("rec-" + std::to_string(i));
    }
    return d;
}

ModelConfig toy_config(ModelKind kind) {
    ModelConfig cfg = ModelConfig::desk_default(kind);
    cfg.vocab_size = 16;
    cfg.embed_dim = 12;
    cfg.hidden = 8;
    cfg.head_dim = 8;
    if (kind == ModelKind::BilstmMh || kind == ModelKind::KdStudent) {
        cfg.heads = 2;
        cfg.head_dim = 4;
    }
    cfg.max_len = 16;
    cfg.dropout = 0.1;
    return cfg;
}

} // namespace

TEST_CASE("bce oracle values") {
    Tensor half = Tensor::from({0.5}, {1, 1});
    CHECK(bce_loss(half, {1}).item() ==
          doctest::Approx(0.6931471805599453).epsilon(1e-12));

    Tensor perfect = Tensor::from({1.0 - 1e-12, 1e-12}, {2, 1});
    CHECK(bce_loss(perfect, {1, 0}).item() == doctest::Approx(0.0).epsilon(1e-9));

    Rng rng(3);
    std::vector<double> ps;
    std::vector<int> ys;
    for (int i = 0; i < 16; ++i) {
        ps.push_back(rng.uniform(0.05, 0.95));
        ys.push_back(int(rng.below(2)));
    }
    double base = bce_loss(Tensor::from(ps, {16, 1}), ys).item();
    std::vector<std::size_t> perm(16);
    for (std::size_t i = 0; i < 16; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<double> ps2(16);
    std::vector<int> ys2(16);
    for (std::size_t i = 0; i < 16; ++i) {
        ps2[i] = ps[perm[i]];
        ys2[i] = ys[perm[i]];
    }
    CHECK(bce_loss(Tensor::from(ps2, {16, 1}), ys2).item() ==
          doctest::Approx(base).epsilon(1e-12));

    CHECK_THROWS_AS(bce_loss(half, {0, 1}), ContractError);
}

TEST_CASE("bce gradient matches finite differences") {
    Rng rng(5);
    Tensor w = Tensor::param({0.3, -0.2, 0.5}, {3, 1});
    Tensor x = Tensor::from({1, 2, -1, 0.5, 1, -2}, {2, 3});
    std::vector<int> y = {1, 0};
    auto f = [&]() { return bce_loss(ops::sigmoid(ops::matmul(x, w)), y); };
    auto report = ops::grad_check(f, {w}, 1e-5);
    CHECK(report.max_rel_err < 1e-5);
}

TEST_CASE("kl soft loss oracles") {
    Tensor z = Tensor::from({2, 0}, {1, 2});
    CHECK(kl_soft_loss(z, z, 2.0).item() == doctest::Approx(0.0));

    // KL(softmax([1,0]) || [0.5,0.5]) computed by an independent oracle
    Tensor z_s = Tensor::from({0, 0}, {1, 2});
    CHECK(kl_soft_loss(z_s, z, 2.0).item() ==
          doctest::Approx(0.11094407167172735).epsilon(1e-12));

    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        Tensor a = Tensor::from({rng.normal() * 3, rng.normal() * 3}, {1, 2});
        Tensor b = Tensor::from({rng.normal() * 3, rng.normal() * 3}, {1, 2});
        const double tau = 0.5 + rng.uniform() * 4.0;
        CHECK(kl_soft_loss(a, b, tau).item() >= -1e-15);
        CHECK(kl_soft_loss(a, a, tau).item() == doctest::Approx(0.0));
    }
}

TEST_CASE("distill loss combination and degenerate cases") {
    Rng rng(9);
    DistillConfig cfg;

    SUBCASE("alpha=1 reduces exactly to the hard loss") {
        cfg.alpha = 1.0;
        Tensor z_s = Tensor::from({0.7, -0.3}, {2, 1});
        Tensor z_t = Tensor::from({1, 0, 0, 1}, {2, 2});
        auto lb = distill_loss(z_s, z_t, {1, 0}, cfg);
        CHECK(lb.l_distill.item() == lb.l_hard.item());
    }

    SUBCASE("alpha=0 with matching logits gives zero") {
        cfg.alpha = 0.0;
        Tensor z_s = Tensor::from({0.8}, {1, 1});
        Tensor z_t = Tensor::from({0.0, 0.8}, {1, 2}); // equals lifted student
        auto lb = distill_loss(z_s, z_t, {1}, cfg);
        CHECK(lb.l_distill.item() == doctest::Approx(0.0));
    }

    SUBCASE("alpha=0.5 tau=2 weights the soft term by 2") {
        Tensor z_s = Tensor::from({0.2}, {1, 1});
        Tensor z_t = Tensor::from({1.5, -0.5}, {1, 2});
        auto lb = distill_loss(z_s, z_t, {0}, cfg);
        CHECK(lb.l_distill.item() ==
              doctest::Approx(0.5 * lb.l_hard.item() + 2.0 * lb.l_soft.item())
                  .epsilon(1e-15));
    }

    SUBCASE("identity holds to 1e-12 over 1000 random draws") {
        for (int i = 0; i < 1000; ++i) {
            DistillConfig c;
            c.alpha = rng.uniform();
            c.tau = 0.25 + rng.uniform() * 4.0;
            Tensor z_s = Tensor::from({rng.normal() * 2}, {1, 1});
            Tensor z_t =
                Tensor::from({rng.normal() * 2, rng.normal() * 2}, {1, 2});
            std::vector<int> y = {int(rng.below(2))};
            auto lb = distill_loss(z_s, z_t, y, c);
            const double expect = c.alpha * lb.l_hard.item() +
                                  (1.0 - c.alpha) * c.tau * c.tau *
                                      lb.l_soft.item();
            CHECK(std::abs(lb.l_distill.item() - expect) <= 1e-12);
        }
    }

    SUBCASE("out-of-range parameters rejected") {
        DistillConfig bad;
        bad.alpha = 1.5;
        Tensor z_s = Tensor::from({0.1}, {1, 1});
        Tensor z_t = Tensor::from({0, 0}, {1, 2});
        CHECK_THROWS_AS(distill_loss(z_s, z_t, {1}, bad), ParameterError);
        bad.alpha = 0.5;
        bad.tau = 0.0;
        CHECK_THROWS_AS(distill_loss(z_s, z_t, {1}, bad), ParameterError);
    }
}

TEST_CASE("hard loss gradient never reaches the teacher logits") {
    Tensor z_t_param = Tensor::param({2.0, -1.0}, {1, 2});
    Tensor z_s = Tensor::param({0.4}, {1, 1});
    DistillConfig cfg;
    auto lb = distill_loss(z_s, z_t_param, {1}, cfg);
    ops::GradMap grads = ops::backward(lb.l_distill);
    CHECK_FALSE(grads.contains(z_t_param));
    Tensor g = grads.grad(z_t_param);
    CHECK(g.at(0) == 0.0);
    CHECK(g.at(1) == 0.0);
    CHECK(grads.contains(z_s));
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
    std::map<std::string, Tensor> params;
    params["w"] = Tensor::param({1.0, -2.0}, {2});
    Tensor unrelated = Tensor::param({5.0}, {1});
    ops::GradMap grads = ops::backward(ops::sum(ops::mul(unrelated, unrelated)));
    AdamState state;
    adam_step(params, grads, state, AdamConfig{});
    CHECK(params["w"].at(0) == 1.0);
    CHECK(params["w"].at(1) == -2.0);
}

TEST_CASE("adam first-step magnitude approaches lr for large gradients") {
    std::map<std::string, Tensor> params;
    params["w"] = Tensor::param({0.0}, {1});
    Tensor w = params["w"];
    ops::GradMap grads = ops::backward(ops::scale(ops::sum(w), 100.0));
    AdamState state;
    AdamConfig cfg;
    adam_step(params, grads, state, cfg);
    CHECK(params["w"].at(0) ==
          doctest::Approx(-0.0009999999999000002).epsilon(1e-12));
}

TEST_CASE("training on a separable toy set reaches 0.99 accuracy") {
    Dataset train_set = separable_dataset(120, 11);
    Dataset val_set = separable_dataset(40, 12);
    ModelGraph model(toy_config(ModelKind::Bilstm), 5);
    TrainConfig cfg;
    cfg.lr = 0.01;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.seed = 3;
    History h = train(model, train_set, val_set, cfg);
    REQUIRE(h.epochs.size() == 5);
    for (std::size_t e = 1; e < h.epochs.size(); ++e)
        CHECK(h.epochs[e].mean_loss < h.epochs[e - 1].mean_loss);

    auto probs = predict_dataset(model, train_set);
    std::vector<int> preds(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) preds[i] = probs[i] >= 0.5;
    auto m = evalbench::metrics(evalbench::confusion(preds, train_set.labels));
    CHECK(m.accuracy >= 0.99);
}

TEST_CASE("epochs=0 leaves the model unchanged with empty history") {
    Dataset train_set = separable_dataset(20, 1);
    ModelGraph model(toy_config(ModelKind::Lstm), 2);
    auto before = model.params().at("head.w").data();
    TrainConfig cfg;
    cfg.epochs = 0;
    History h = train(model, train_set, {}, cfg);
    CHECK(h.steps.empty());
    CHECK(h.epochs.empty());
    CHECK(model.params().at("head.w").data() == before);

    CHECK_THROWS_AS(train(model, {}, {}, cfg), ParameterError);
}

TEST_CASE("training is deterministic under a fixed seed") {
    Dataset train_set = separable_dataset(40, 4);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.seed = 77;
    ModelGraph a(toy_config(ModelKind::BilstmMh), 9);
    ModelGraph b(toy_config(ModelKind::BilstmMh), 9);
    History ha = train(a, train_set, {}, cfg);
    History hb = train(b, train_set, {}, cfg);
    for (const auto& [name, t] : a.params())
        CHECK(t.data() == b.params().at(name).data());
    REQUIRE(ha.steps.size() == hb.steps.size());
    for (std::size_t i = 0; i < ha.steps.size(); ++i)
        CHECK(ha.steps[i].l_distill == hb.steps[i].l_distill);
}

TEST_CASE("distillation never touches teacher parameters") {
    Dataset train_set = separable_dataset(40, 21);
    ModelConfig tcfg = toy_config(ModelKind::TinyTeacher);
    ModelGraph teacher(tcfg, 31);
    std::map<std::string, std::vector<double>> before;
    for (const auto& [name, t] : teacher.params()) before[name] = t.data();

    ModelConfig scfg = toy_config(ModelKind::KdStudent);
    scfg.embed_dim = tcfg.embed_dim;
    ModelGraph student(scfg, 32);
    DistillConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 8;
    distill_train(student, &teacher, train_set, {}, cfg);
    for (const auto& [name, t] : teacher.params())
        CHECK(t.data() == before[name]);
}

TEST_CASE("alpha=1 distillation walks the plain training trajectory") {
    Dataset train_set = separable_dataset(48, 41);
    ModelConfig cfg_m = toy_config(ModelKind::BilstmMh);
    ModelGraph a(cfg_m, 55);
    ModelGraph b(cfg_m, 55);

    TrainConfig tc;
    tc.lr = 1e-3;
    tc.epochs = 2;
    tc.batch_size = 8;
    tc.seed = 13;
    History ht = train(a, train_set, {}, tc);

    DistillConfig dc;
    dc.alpha = 1.0;
    dc.tau = 2.0;
    dc.lr = 1e-3;
    dc.epochs = 2;
    dc.batch_size = 8;
    dc.seed = 13;
    // teacher logits are irrelevant at alpha=1; supply zeros for every id
    models::TeacherLogits table;
    for (const auto& id : train_set.ids) table.logits[id] = {0.0, 0.0};
    History hd = distill_train(b, &table, train_set, {}, dc);

    REQUIRE(ht.steps.size() == hd.steps.size());
    for (std::size_t i = 0; i < ht.steps.size(); ++i)
        CHECK(hd.steps[i].l_distill ==
              doctest::Approx(ht.steps[i].l_distill).epsilon(1e-9));
    for (const auto& [name, t] : a.params()) {
        const auto& other = b.params().at(name).data();
        for (std::size_t i = 0; i < t.numel(); ++i)
            CHECK(t.data()[i] == doctest::Approx(other[i]).epsilon(1e-7));
    }
}

TEST_CASE("distillation with noisy labels beats hard-label training") {
    // train labels carry 8% noise; the teacher table holds clean confident
    // logits, so the softened targets should counteract the noise
    double kd_f1_sum = 0.0, hard_f1_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Dataset train_set = separable_dataset(160, 100 + seed, 0.08);
        Dataset clean_val = separable_dataset(60, 200 + seed);
        models::TeacherLogits table;
        for (std::size_t i = 0; i < train_set.size(); ++i) {
            const int truth = int(i % 2); // pre-flip label by construction
            table.logits[train_set.ids[i]] =
                truth ? std::array<double, 2>{0.0, 3.0}
                      : std::array<double, 2>{3.0, 0.0};
        }
        ModelConfig mc = toy_config(ModelKind::BilstmMh);
        ModelGraph kd(mc, seed);
        ModelGraph hard(mc, seed);

        DistillConfig dc;
        dc.lr = 5e-3;
        dc.epochs = 3;
        dc.batch_size = 16;
        dc.seed = seed;
        distill_train(kd, &table, train_set, {}, dc);

        TrainConfig tc;
        tc.lr = 5e-3;
        tc.epochs = 3;
        tc.batch_size = 16;
        tc.seed = seed;
        train(hard, train_set, {}, tc);

        auto eval_f1 = [&](ModelGraph& m) {
            auto probs = predict_dataset(m, clean_val);
            std::vector<int> preds(probs.size());
            for (std::size_t i = 0; i < probs.size(); ++i)
                preds[i] = probs[i] >= 0.5;
            return evalbench::metrics(
                       evalbench::confusion(preds, clean_val.labels))
                .f1;
        };
        kd_f1_sum += eval_f1(kd);
        hard_f1_sum += eval_f1(hard);
    }
    CHECK(kd_f1_sum / 5.0 >= hard_f1_sum / 5.0);
}

TEST_CASE("distillation reports missing teacher logits") {
    Dataset train_set = separable_dataset(10, 3);
    models::TeacherLogits table;
    table.logits[train_set.ids[0]] = {0.0, 1.0}; // the rest are missing
    ModelGraph student(toy_config(ModelKind::BilstmMh), 1);
    DistillConfig cfg;
    try {
        distill_train(student, &table, train_set, {}, cfg);
        FAIL("expected ContractError");
    } catch (const ContractError& e) {
        CHECK(std::string(e.what()).find("rec-1") != std::string::npos);
    }
}

TEST_CASE("history CSV has the documented columns") {
    Dataset train_set = separable_dataset(16, 9);
    Dataset val_set = separable_dataset(8, 10);
    ModelGraph model(toy_config(ModelKind::Lstm), 4);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 8;
    History h = train(model, train_set, val_set, cfg);
    const std::string path =
        (std::filesystem::temp_directory_path() / "phishkit_history.csv").string();
    h.save_csv(path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "epoch,step,l_hard,l_soft,l_distill,val_acc,val_f1");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == h.steps.size());
    std::remove(path.c_str());
}
