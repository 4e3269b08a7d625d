#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "phishkit/layers/attention.hpp"
#include "phishkit/layers/checkpoint.hpp"
#include "phishkit/layers/common.hpp"
#include "phishkit/layers/lstm.hpp"

using namespace phishkit;
using namespace phishkit::layers;
namespace ops = phishkit::numerics;
using ops::Tensor;

namespace {

Tensor random_tensor(ops::Shape shape, Rng& rng, double scale = 1.0) {
    std::vector<double> v(ops::shape_numel(shape));
    for (auto& x : v) x = rng.normal() * scale;
    return Tensor::from(std::move(v), std::move(shape));
}

LstmParams zero_lstm(std::size_t input, std::size_t hidden) {
    Rng rng(0);
    LstmParams p = LstmParams::init(input, hidden, rng);
    for (auto& [name, t] : p.named("x")) {
        (void)name;
        std::fill(t.mutable_data().begin(), t.mutable_data().end(), 0.0);
    }
    return p;
}

std::vector<Tensor> param_list(
    const std::vector<std::pair<std::string, Tensor>>& named) {
    std::vector<Tensor> out;
    for (const auto& [n, t] : named) {
        (void)n;
        out.push_back(t);
    }
    return out;
}

} // namespace

TEST_CASE("lstm cell: zero parameters give zero state") {
    LstmParams p = zero_lstm(3, 4);
    LstmState prev = LstmState::zero(1, 4);
    Tensor x = Tensor::from({1.0, -2.0, 0.5}, {3});
    LstmState next = lstm_cell_forward(x, prev, p);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(next.h.at(j) == doctest::Approx(0.0));
        CHECK(next.c.at(j) == doctest::Approx(0.0));
    }
}

TEST_CASE("lstm cell: saturated forget gate retains memory") {
    Rng rng(42);
    LstmParams p = LstmParams::init(3, 4, rng);
    std::fill(p.b_f.mutable_data().begin(), p.b_f.mutable_data().end(), 20.0);
    Tensor x = random_tensor({1, 3}, rng);
    LstmState prev{random_tensor({1, 4}, rng), random_tensor({1, 4}, rng)};
    LstmState next = lstm_cell_forward(x, prev, p);
    // with f ~ 1: C_t ~ C_{t-1} + i * cand; recompute i and cand directly
    Tensor hx = ops::concat_cols({prev.h, x});
    Tensor i = ops::sigmoid(ops::add_rowvec(ops::matmul(hx, p.w_i), p.b_i));
    Tensor cand = ops::tanh_act(ops::add_rowvec(ops::matmul(hx, p.w_c), p.b_c));
    for (std::size_t j = 0; j < 4; ++j) {
        const double want = prev.c.at(j) + i.at(j) * cand.at(j);
        CHECK(next.c.at(j) == doctest::Approx(want).epsilon(1e-6));
    }
}

TEST_CASE("lstm cell gradients match finite differences") {
    Rng rng(7);
    LstmParams p = LstmParams::init(4, 4, rng);
    Tensor x = random_tensor({1, 4}, rng);
    Tensor coef = random_tensor({1, 4}, rng);
    auto f = [&]() {
        LstmState s = LstmState::zero(1, 4);
        s = lstm_cell_forward(x, s, p);
        return ops::sum(ops::mul(s.h, coef));
    };
    auto report = ops::grad_check(f, param_list(p.named("lstm")), 1e-5);
    CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("lstm over three steps passes finite differences") {
    Rng rng(8);
    LstmParams p = LstmParams::init(3, 4, rng);
    Tensor seq = random_tensor({3, 3}, rng);
    Tensor coef = random_tensor({3, 4}, rng);
    auto f = [&]() { return ops::sum(ops::mul(lstm_forward(seq, p), coef)); };
    auto report = ops::grad_check(f, param_list(p.named("lstm")), 1e-5);
    CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("lstm forward composition") {
    Rng rng(9);
    LstmParams p = LstmParams::init(3, 5, rng);
    Tensor seq = random_tensor({4, 3}, rng);

    SUBCASE("T=1 equals a single cell step") {
        Tensor one = ops::slice_rows(seq, 0, 1);
        Tensor out = lstm_forward(one, p);
        LstmState s = lstm_cell_forward(one, LstmState::zero(1, 5), p);
        for (std::size_t j = 0; j < 5; ++j) CHECK(out.at(0, j) == s.h.at(0, j));
    }

    SUBCASE("zero parameters give all-zero outputs") {
        LstmParams z = zero_lstm(3, 5);
        Tensor out = lstm_forward(seq, z);
        for (std::size_t i = 0; i < out.numel(); ++i) CHECK(out.at(i) == 0.0);
    }

    SUBCASE("splitting the sequence and threading state matches") {
        Tensor whole = lstm_forward(seq, p);
        LstmState s = LstmState::zero(1, 5);
        std::vector<Tensor> rows;
        for (std::size_t t = 0; t < 4; ++t) {
            s = lstm_cell_forward(ops::slice_rows(seq, t, 1), s, p);
            rows.push_back(s.h);
        }
        Tensor threaded = ops::concat_rows(rows);
        for (std::size_t i = 0; i < whole.numel(); ++i)
            CHECK(whole.at(i) == doctest::Approx(threaded.at(i)).epsilon(1e-12));
    }

    SUBCASE("empty sequence is a parameter error") {
        CHECK_THROWS_AS(lstm_forward(Tensor::zeros({0, 3}), p), ParameterError);
    }
}

TEST_CASE("bilstm symmetry on palindromic input with shared params") {
    Rng rng(10);
    LstmParams p = LstmParams::init(3, 4, rng);
    Tensor half = random_tensor({2, 3}, rng);
    Tensor pal = ops::concat_rows({half, ops::gather_rows(half, {1, 0})}); // abba
    Tensor out = bilstm_forward(pal, p, p);
    const std::size_t T = 4, H = 4;
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < H; ++j) {
            CHECK(out.at(t, j) ==
                  doctest::Approx(out.at(T - 1 - t, H + j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("bilstm width and zero cases") {
    Rng rng(11);
    LstmParams f = LstmParams::init(8, 128, rng);
    LstmParams b = LstmParams::init(8, 128, rng);
    Tensor seq = random_tensor({2, 8}, rng);
    Tensor out = bilstm_forward(seq, f, b);
    CHECK(out.cols() == 256); // 128 units per direction

    LstmParams zf = zero_lstm(3, 4), zb = zero_lstm(3, 4);
    Tensor z = bilstm_forward(random_tensor({3, 3}, rng), zf, zb);
    CHECK(z.cols() == 8);
    for (std::size_t i = 0; i < z.numel(); ++i) CHECK(z.at(i) == 0.0);

    LstmParams small = LstmParams::init(3, 2, rng);
    CHECK_THROWS_AS(bilstm_forward(random_tensor({2, 3}, rng), zf, small),
                    DimensionError);
}

TEST_CASE("bilstm reversal identity with swapped directions") {
    Rng rng(12);
    LstmParams f = LstmParams::init(3, 4, rng);
    LstmParams b = LstmParams::init(3, 4, rng);
    Tensor seq = random_tensor({5, 3}, rng);
    std::vector<std::size_t> rev = {4, 3, 2, 1, 0};
    Tensor a = bilstm_forward(seq, f, b);
    Tensor c = bilstm_forward(ops::gather_rows(seq, rev), b, f);
    // rows reversed, halves swapped
    for (std::size_t t = 0; t < 5; ++t)
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(a.at(t, j) == doctest::Approx(c.at(4 - t, 4 + j)).epsilon(1e-12));
            CHECK(a.at(t, 4 + j) == doctest::Approx(c.at(4 - t, j)).epsilon(1e-12));
        }
}

TEST_CASE("attention with constant keys averages the value rows") {
    Rng rng(13);
    AttentionParams p = AttentionParams::init(3, 4, rng);
    std::fill(p.w_k.mutable_data().begin(), p.w_k.mutable_data().end(), 0.0);
    Tensor h = random_tensor({5, 3}, rng);
    AttentionOutput out = attention_single(h, p);
    Tensor v = ops::matmul(h, p.w_v);
    for (std::size_t j = 0; j < 4; ++j) {
        double mean_v = 0.0;
        for (std::size_t t = 0; t < 5; ++t) mean_v += v.at(t, j);
        mean_v /= 5.0;
        for (std::size_t t = 0; t < 5; ++t)
            CHECK(out.seq.at(t, j) == doctest::Approx(mean_v).epsilon(1e-12));
        CHECK(out.pooled.at(j) == doctest::Approx(mean_v).epsilon(1e-12));
    }
}

TEST_CASE("attention with a single timestep is the value row") {
    Rng rng(14);
    AttentionParams p = AttentionParams::init(3, 4, rng);
    Tensor h = random_tensor({1, 3}, rng);
    AttentionOutput out = attention_single(h, p);
    Tensor v = ops::matmul(h, p.w_v);
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(out.seq.at(0, j) == doctest::Approx(v.at(0, j)).epsilon(1e-12));
}

TEST_CASE("attention weights are row-stochastic") {
    // identity value projection over one-hot inputs exposes the raw weights
    Rng rng(15);
    const std::size_t t_len = 6;
    AttentionParams p = AttentionParams::init(t_len, t_len, rng);
    std::vector<double> eye(t_len * t_len, 0.0);
    for (std::size_t i = 0; i < t_len; ++i) eye[i * t_len + i] = 1.0;
    p.w_v = Tensor::param(eye, {t_len, t_len});
    Tensor h = Tensor::from(eye, {t_len, t_len}); // V = I, so ctx rows are weights
    AttentionOutput out = attention_single(h, p);
    const Tensor& a = out.seq;
    for (std::size_t i = 0; i < t_len; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < t_len; ++j) {
            CHECK(a.at(i, j) >= 0.0);
            row_sum += a.at(i, j);
        }
        CHECK(std::abs(row_sum - 1.0) < 1e-12);
    }
}

TEST_CASE("multi-head with one head and identity projection equals single") {
    Rng rng(16);
    MultiHeadParams mh;
    mh.heads.push_back(AttentionParams::init(3, 4, rng));
    std::vector<double> eye(16, 0.0);
    for (std::size_t i = 0; i < 4; ++i) eye[i * 4 + i] = 1.0;
    mh.w_o = Tensor::param(eye, {4, 4});
    mh.b_o = Tensor::param(std::vector<double>(4, 0.0), {4});
    Tensor h = random_tensor({5, 3}, rng);
    Tensor multi = attention_multihead(h, mh);
    AttentionOutput single = attention_single(h, mh.heads[0]);
    for (std::size_t i = 0; i < multi.numel(); ++i)
        CHECK(multi.at(i) == doctest::Approx(single.seq.at(i)).epsilon(1e-15));
}

TEST_CASE("multi-head pre-projection width matches heads x head_dim") {
    Rng rng(17);
    MultiHeadParams p = MultiHeadParams::init(16, 4, 64, 32, rng);
    CHECK(p.w_o.rows() == 256); // H=4, D=64
    Tensor h = random_tensor({3, 16}, rng);
    CHECK(attention_multihead(h, p).cols() == 32);

    MultiHeadParams bad = p;
    bad.w_o = xavier_uniform(255, 32, rng);
    CHECK_THROWS_AS(attention_multihead(h, bad), DimensionError);
}

TEST_CASE("permuting heads with matching w_o row blocks changes nothing") {
    Rng rng(18);
    MultiHeadParams p = MultiHeadParams::init(5, 3, 2, 4, rng);
    Tensor h = random_tensor({4, 5}, rng);
    Tensor base = attention_multihead(h, p);

    MultiHeadParams q = p;
    std::swap(q.heads[0], q.heads[2]);
    // swap w_o row blocks 0 and 2 (each 2 rows wide)
    std::vector<std::size_t> perm = {4, 5, 2, 3, 0, 1};
    q.w_o = Tensor::param(ops::gather_rows(p.w_o, perm).data(), {6, 4});
    Tensor swapped = attention_multihead(h, q);
    for (std::size_t i = 0; i < base.numel(); ++i)
        CHECK(base.at(i) == doctest::Approx(swapped.at(i)).epsilon(1e-15));
}

TEST_CASE("multi-head attention gradients match finite differences") {
    Rng rng(19);
    MultiHeadParams p = MultiHeadParams::init(4, 2, 3, 5, rng);
    Tensor h = random_tensor({4, 4}, rng);
    Tensor coef = random_tensor({4, 5}, rng);
    auto f = [&]() {
        return ops::sum(ops::mul(attention_multihead(h, p), coef));
    };
    auto report = ops::grad_check(f, param_list(p.named("mha")), 1e-5);
    CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("global average pool properties") {
    Rng rng(20);
    Tensor row = random_tensor({1, 6}, rng);
    Tensor same = global_average_pool(row);
    for (std::size_t j = 0; j < 6; ++j) CHECK(same.at(j) == row.at(0, j));

    Tensor u = random_tensor({1, 4}, rng);
    Tensor pm = ops::concat_rows({u, ops::scale(u, -1.0)});
    Tensor zero = global_average_pool(pm);
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(zero.at(j) == doctest::Approx(0.0).epsilon(1e-15));

    Tensor seq = random_tensor({5, 3}, rng);
    Tensor a = global_average_pool(seq);
    Tensor b = global_average_pool(ops::gather_rows(seq, {3, 1, 4, 0, 2}));
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(a.at(j) == doctest::Approx(b.at(j)).epsilon(1e-12));
}

TEST_CASE("dense sigmoid head") {
    Tensor w = Tensor::param(std::vector<double>(6, 0.0), {6, 1});
    Tensor b = Tensor::param({0.0}, {1});
    Tensor x = Tensor::from({1, 2, 3, 4, 5, 6}, {6});
    CHECK(dense_sigmoid(x, w, b).item() == doctest::Approx(0.5));

    Tensor b20 = Tensor::param({20.0}, {1});
    CHECK(dense_sigmoid(x, w, b20).item() == doctest::Approx(1.0).epsilon(1e-8));

    Rng rng(21);
    Tensor wr = xavier_uniform(6, 1, rng);
    auto f = [&]() { return dense_sigmoid(x, wr, b); };
    auto report = ops::grad_check(f, {wr, b}, 1e-5);
    CHECK(report.max_rel_err < 1e-5);
}

TEST_CASE("batched lstm matches per-sample runs under padding") {
    Rng rng(22);
    LstmParams p = LstmParams::init(3, 4, rng);
    Tensor s0 = random_tensor({4, 3}, rng); // full length
    Tensor s1 = random_tensor({2, 3}, rng); // padded by 2

    SeqBatch batch;
    batch.batch = 2;
    batch.steps = 4;
    batch.data = ops::concat_rows({s0, s1, Tensor::zeros({2, 3})});
    batch.mask = {1, 1, 1, 1, 1, 1, 0, 0};

    LstmBatchOutput out = lstm_forward_batch(batch, p, false);
    Tensor r0 = lstm_forward(s0, p);
    Tensor r1 = lstm_forward(s1, p);
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(out.seq.at(t, j) == doctest::Approx(r0.at(t, j)).epsilon(1e-12));
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(out.seq.at(4 + t, j) == doctest::Approx(r1.at(t, j)).epsilon(1e-12));
    // final state of the padded sample is its last valid state
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(out.final.at(0, j) == doctest::Approx(r0.at(3, j)).epsilon(1e-12));
        CHECK(out.final.at(1, j) == doctest::Approx(r1.at(1, j)).epsilon(1e-12));
    }
}

TEST_CASE("batched bilstm final state concatenates direction finals") {
    Rng rng(23);
    LstmParams f = LstmParams::init(3, 4, rng);
    LstmParams b = LstmParams::init(3, 4, rng);
    Tensor s = random_tensor({3, 3}, rng);
    SeqBatch batch;
    batch.batch = 1;
    batch.steps = 3;
    batch.data = s;
    batch.mask = {1, 1, 1};
    BilstmBatchOutput out = bilstm_forward_batch(batch, f, b);
    Tensor ref = bilstm_forward(s, f, b);
    for (std::size_t i = 0; i < ref.numel(); ++i)
        CHECK(out.seq.at(i) == doctest::Approx(ref.at(i)).epsilon(1e-12));
    // fwd final = row T-1 first half; bwd final = row 0 second half
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(out.final.at(0, j) == doctest::Approx(ref.at(2, j)).epsilon(1e-12));
        CHECK(out.final.at(0, 4 + j) == doctest::Approx(ref.at(0, 4 + j)).epsilon(1e-12));
    }
}

TEST_CASE("batched attention ignores padded keys") {
    Rng rng(24);
    AttentionParams p = AttentionParams::init(3, 4, rng);
    Tensor s = random_tensor({2, 3}, rng);
    SeqBatch padded;
    padded.batch = 1;
    padded.steps = 4;
    padded.data = ops::concat_rows({s, Tensor::zeros({2, 3})});
    padded.mask = {1, 1, 0, 0};
    Tensor out = attention_single_batch(padded, p);
    AttentionOutput ref = attention_single(s, p);
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(out.at(t, j) == doctest::Approx(ref.seq.at(t, j)).epsilon(1e-12));
}

TEST_CASE("masked mean pool averages only valid rows") {
    Tensor x = Tensor::from({1, 2, 3, 4, 100, 100}, {3, 2});
    Tensor pooled = masked_mean_pool(x, 1, 3, {1, 1, 0});
    CHECK(pooled.at(0, 0) == doctest::Approx(2.0));
    CHECK(pooled.at(0, 1) == doctest::Approx(3.0));
}

TEST_CASE("checkpoint archive round trips bitwise") {
    Rng rng(25);
    NamedTensors named;
    named.emplace_back("embed.table", random_tensor({7, 3}, rng));
    named.emplace_back("lstm.fwd.w_f", random_tensor({5, 4}, rng));
    named.emplace_back("head.b", random_tensor({1}, rng));
    const std::string path =
        (std::filesystem::temp_directory_path() / "phishkit_ckpt_test.bin").string();
    save_checkpoint(named, path);
    NamedTensors loaded = load_checkpoint(path);
    REQUIRE(loaded.size() == named.size());
    for (std::size_t i = 0; i < named.size(); ++i) {
        CHECK(loaded[i].first == named[i].first);
        CHECK(loaded[i].second.shape() == named[i].second.shape());
        CHECK(loaded[i].second.data() == named[i].second.data());
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
}
