#include "phishkit/models/graph.hpp"

#include <cmath>

#include "phishkit/error.hpp"
#include "phishkit/layers/checkpoint.hpp"
#include "phishkit/numerics/rng.hpp"

namespace phishkit::models {

namespace ops = phishkit::numerics;
using layers::LstmParams;
using layers::MultiHeadParams;
using numerics::Rng;

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Lstm: return "lstm";
        case ModelKind::Bilstm: return "bilstm";
        case ModelKind::BilstmSh: return "bilstm_sh";
        case ModelKind::BilstmMh: return "bilstm_mh";
        case ModelKind::KdStudent: return "kd_student";
        case ModelKind::TinyTeacher: return "tiny_teacher";
    }
    return "unknown";
}

ModelKind model_kind_from(const std::string& name) {
    if (name == "lstm") return ModelKind::Lstm;
    if (name == "bilstm") return ModelKind::Bilstm;
    if (name == "bilstm_sh") return ModelKind::BilstmSh;
    if (name == "bilstm_mh") return ModelKind::BilstmMh;
    if (name == "kd_student") return ModelKind::KdStudent;
    if (name == "tiny_teacher") return ModelKind::TinyTeacher;
    throw ParameterError("unknown model kind \"" + name +
                         "\" (expected lstm, bilstm, bilstm_sh, bilstm_mh, "
                         "kd_student or tiny_teacher)");
}

bool is_student(ModelKind kind) { return kind != ModelKind::TinyTeacher; }

ModelConfig ModelConfig::paper_default(ModelKind kind) {
    ModelConfig cfg;
    cfg.kind = kind;
    switch (kind) {
        case ModelKind::Lstm:
        case ModelKind::Bilstm:
            cfg.embed_dim = 100;
            break;
        case ModelKind::BilstmSh:
            cfg.embed_dim = 100;
            cfg.head_dim = 64;
            break;
        case ModelKind::BilstmMh:
            cfg.embed_dim = 100;
            break;
        case ModelKind::KdStudent:
            cfg.embed_dim = 128;
            break;
        case ModelKind::TinyTeacher:
            cfg.embed_dim = 128;
            cfg.layers = 4;
            cfg.head_dim = 32;
            cfg.ffn_dim = 512;
            cfg.dropout = 0.1;
            break;
    }
    return cfg;
}

ModelConfig ModelConfig::desk_default(ModelKind kind) {
    ModelConfig cfg;
    cfg.kind = kind;
    cfg.vocab_size = 4000;
    cfg.hidden = 24;
    cfg.max_len = 48;
    switch (kind) {
        case ModelKind::Lstm:
        case ModelKind::Bilstm:
            cfg.embed_dim = 24;
            break;
        case ModelKind::BilstmSh:
            cfg.embed_dim = 24;
            cfg.heads = 1;
            cfg.head_dim = 24;
            break;
        case ModelKind::BilstmMh:
            cfg.embed_dim = 24;
            cfg.heads = 4;
            cfg.head_dim = 12;
            break;
        case ModelKind::KdStudent:
            cfg.embed_dim = 32;
            cfg.heads = 4;
            cfg.head_dim = 12;
            cfg.max_len = 80;
            break;
        case ModelKind::TinyTeacher:
            cfg.embed_dim = 32;
            cfg.layers = 2;
            cfg.heads = 4;
            cfg.head_dim = 8;
            cfg.ffn_dim = 64;
            cfg.dropout = 0.1;
            cfg.max_len = 80;
            break;
    }
    return cfg;
}

TokenBatch make_token_batch(const std::vector<text::TokenSequence>& seqs,
                            std::size_t max_len) {
    if (seqs.empty()) throw ParameterError("make_token_batch: empty batch");
    TokenBatch out;
    out.batch = seqs.size();
    std::size_t longest = 1;
    for (const auto& s : seqs)
        longest = std::max(longest, std::min(s.ids.size(), max_len));
    out.steps = longest;
    out.ids.assign(out.batch * out.steps, text::Vocab::kPad);
    out.mask.assign(out.batch * out.steps, 0.0);
    for (std::size_t b = 0; b < out.batch; ++b) {
        const auto& ids = seqs[b].ids;
        std::size_t len = std::min(ids.size(), out.steps);
        if (len == 0) {
            // degenerate empty email: a single [UNK] keeps pooling defined
            out.ids[b * out.steps] = text::Vocab::kUnk;
            out.mask[b * out.steps] = 1.0;
            continue;
        }
        for (std::size_t t = 0; t < len; ++t) {
            out.ids[b * out.steps + t] = ids[t];
            out.mask[b * out.steps + t] = 1.0;
        }
    }
    return out;
}

namespace {

Tensor zero_param(ops::Shape shape) {
    const std::size_t n = ops::shape_numel(shape);
    return Tensor::param(std::vector<double>(n, 0.0), std::move(shape));
}

Tensor ones_param(ops::Shape shape) {
    const std::size_t n = ops::shape_numel(shape);
    return Tensor::param(std::vector<double>(n, 1.0), std::move(shape));
}

} // namespace

ModelGraph::ModelGraph(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg_.vocab_size < text::Vocab::kReserved)
        throw ParameterError("ModelGraph: vocab_size below reserved ids");
    if (cfg_.ffn_dim == 0) cfg_.ffn_dim = 4 * cfg_.embed_dim;
    build(seed);
}

void ModelGraph::build(std::uint64_t seed) {
    Rng rng(numerics::derive_seed(seed, 0x6d6f646cULL +
                                            static_cast<std::uint64_t>(cfg_.kind)));
    // Embedding table with the [PAD] row pinned at zero.
    {
        std::vector<double> v(cfg_.vocab_size * cfg_.embed_dim);
        const double limit = std::sqrt(6.0 / double(cfg_.vocab_size + cfg_.embed_dim));
        for (auto& x : v) x = rng.uniform(-limit, limit);
        for (std::size_t c = 0; c < cfg_.embed_dim; ++c) v[c] = 0.0;
        params_["embed.table"] =
            Tensor::param(std::move(v), {cfg_.vocab_size, cfg_.embed_dim});
    }

    auto add_lstm = [&](const std::string& prefix, std::size_t in,
                        std::size_t hid) {
        LstmParams p = LstmParams::init(in, hid, rng);
        for (auto& [name, t] : p.named(prefix)) params_[name] = t;
    };
    auto add_mha = [&](const std::string& prefix, std::size_t model_dim,
                       std::size_t heads, std::size_t head_dim,
                       std::size_t out_dim) {
        MultiHeadParams p =
            MultiHeadParams::init(model_dim, heads, head_dim, out_dim, rng);
        for (auto& [name, t] : p.named(prefix)) params_[name] = t;
    };

    switch (cfg_.kind) {
        case ModelKind::Lstm: {
            add_lstm("lstm", cfg_.embed_dim, cfg_.hidden);
            params_["head.w"] = layers::xavier_uniform(cfg_.hidden, 1, rng);
            params_["head.b"] = zero_param({1});
            break;
        }
        case ModelKind::Bilstm: {
            add_lstm("lstm.fwd", cfg_.embed_dim, cfg_.hidden);
            add_lstm("lstm.bwd", cfg_.embed_dim, cfg_.hidden);
            params_["head.w"] = layers::xavier_uniform(2 * cfg_.hidden, 1, rng);
            params_["head.b"] = zero_param({1});
            break;
        }
        case ModelKind::BilstmSh: {
            add_lstm("lstm.fwd", cfg_.embed_dim, cfg_.hidden);
            add_lstm("lstm.bwd", cfg_.embed_dim, cfg_.hidden);
            layers::AttentionParams att =
                layers::AttentionParams::init(2 * cfg_.hidden, cfg_.head_dim, rng);
            for (auto& [name, t] : att.named("attn")) params_[name] = t;
            params_["head.w"] = layers::xavier_uniform(cfg_.head_dim, 1, rng);
            params_["head.b"] = zero_param({1});
            break;
        }
        case ModelKind::BilstmMh:
        case ModelKind::KdStudent: {
            add_lstm("lstm.fwd", cfg_.embed_dim, cfg_.hidden);
            add_lstm("lstm.bwd", cfg_.embed_dim, cfg_.hidden);
            const std::size_t out_dim = 2 * cfg_.hidden;
            add_mha("mha", 2 * cfg_.hidden, cfg_.heads, cfg_.head_dim, out_dim);
            params_["head.w"] = layers::xavier_uniform(out_dim, 1, rng);
            params_["head.b"] = zero_param({1});
            break;
        }
        case ModelKind::TinyTeacher: {
            std::vector<double> pos(cfg_.max_len * cfg_.embed_dim);
            const double limit = 0.02;
            for (auto& x : pos) x = rng.uniform(-limit, limit);
            params_["pos.table"] =
                Tensor::param(std::move(pos), {cfg_.max_len, cfg_.embed_dim});
            for (std::size_t l = 0; l < cfg_.layers; ++l) {
                const std::string p = "l" + std::to_string(l);
                params_[p + ".ln1.gamma"] = ones_param({cfg_.embed_dim});
                params_[p + ".ln1.beta"] = zero_param({cfg_.embed_dim});
                add_mha(p + ".mha", cfg_.embed_dim, cfg_.heads, cfg_.head_dim,
                        cfg_.embed_dim);
                params_[p + ".ln2.gamma"] = ones_param({cfg_.embed_dim});
                params_[p + ".ln2.beta"] = zero_param({cfg_.embed_dim});
                params_[p + ".ffn.w1"] =
                    layers::xavier_uniform(cfg_.embed_dim, cfg_.ffn_dim, rng);
                params_[p + ".ffn.b1"] = zero_param({cfg_.ffn_dim});
                params_[p + ".ffn.w2"] =
                    layers::xavier_uniform(cfg_.ffn_dim, cfg_.embed_dim, rng);
                params_[p + ".ffn.b2"] = zero_param({cfg_.embed_dim});
            }
            params_["final_ln.gamma"] = ones_param({cfg_.embed_dim});
            params_["final_ln.beta"] = zero_param({cfg_.embed_dim});
            params_["head.w"] = layers::xavier_uniform(cfg_.embed_dim, 2, rng);
            params_["head.b"] = zero_param({2});
            break;
        }
    }
}

LstmParams ModelGraph::lstm_at(const std::string& prefix) const {
    LstmParams p;
    p.w_f = params_.at(prefix + ".w_f");
    p.w_i = params_.at(prefix + ".w_i");
    p.w_c = params_.at(prefix + ".w_c");
    p.w_o = params_.at(prefix + ".w_o");
    p.b_f = params_.at(prefix + ".b_f");
    p.b_i = params_.at(prefix + ".b_i");
    p.b_c = params_.at(prefix + ".b_c");
    p.b_o = params_.at(prefix + ".b_o");
    p.hidden_dim = p.b_f.numel();
    p.input_dim = p.w_f.rows() - p.hidden_dim;
    return p;
}

MultiHeadParams ModelGraph::mha_at(const std::string& prefix,
                                   std::size_t heads) const {
    MultiHeadParams p;
    for (std::size_t h = 0; h < heads; ++h) {
        const std::string hp = prefix + ".head" + std::to_string(h);
        p.heads.push_back({params_.at(hp + ".w_q"), params_.at(hp + ".w_k"),
                           params_.at(hp + ".w_v")});
    }
    p.w_o = params_.at(prefix + ".w_o");
    p.b_o = params_.at(prefix + ".b_o");
    return p;
}

Tensor ModelGraph::forward(const TokenBatch& batch, bool train,
                           std::uint64_t step_seed) {
    if (batch.steps > cfg_.max_len)
        throw DimensionError("forward: batch steps " +
                             std::to_string(batch.steps) + " exceed max_len " +
                             std::to_string(cfg_.max_len));
    for (std::size_t id : batch.ids)
        if (id >= cfg_.vocab_size)
            throw DimensionError("forward: token id out of vocabulary range");
    Tensor emb = ops::gather_rows(params_.at("embed.table"), batch.ids);
    SeqBatch sb{emb, batch.batch, batch.steps, batch.mask};
    if (cfg_.kind == ModelKind::TinyTeacher)
        return forward_teacher(sb, batch, train, step_seed);
    return forward_student(sb, batch, train, step_seed);
}

Tensor ModelGraph::forward_student(const SeqBatch& sb, const TokenBatch& batch,
                                   bool train, std::uint64_t step_seed) {
    Tensor feat;
    switch (cfg_.kind) {
        case ModelKind::Lstm:
            feat = layers::lstm_forward_batch(sb, lstm_at("lstm"), false).final;
            break;
        case ModelKind::Bilstm:
            feat = layers::bilstm_forward_batch(sb, lstm_at("lstm.fwd"),
                                                lstm_at("lstm.bwd"))
                       .final;
            break;
        case ModelKind::BilstmSh: {
            Tensor seq = layers::bilstm_forward_batch(sb, lstm_at("lstm.fwd"),
                                                      lstm_at("lstm.bwd"))
                             .seq;
            SeqBatch hb{seq, batch.batch, batch.steps, batch.mask};
            layers::AttentionParams att{params_.at("attn.w_q"),
                                        params_.at("attn.w_k"),
                                        params_.at("attn.w_v")};
            Tensor ctx = layers::attention_single_batch(hb, att);
            feat = layers::masked_mean_pool(ctx, batch.batch, batch.steps,
                                            batch.mask);
            break;
        }
        case ModelKind::BilstmMh:
        case ModelKind::KdStudent: {
            Tensor seq = layers::bilstm_forward_batch(sb, lstm_at("lstm.fwd"),
                                                      lstm_at("lstm.bwd"))
                             .seq;
            SeqBatch hb{seq, batch.batch, batch.steps, batch.mask};
            Tensor ctx = layers::attention_multihead_batch(
                hb, mha_at("mha", cfg_.heads));
            feat = layers::masked_mean_pool(ctx, batch.batch, batch.steps,
                                            batch.mask);
            break;
        }
        default:
            throw ContractError("forward_student on a non-student model");
    }
    feat = ops::dropout(feat, cfg_.dropout, train, step_seed);
    return ops::add_rowvec(ops::matmul(feat, params_.at("head.w")),
                           params_.at("head.b"));
}

Tensor ModelGraph::forward_teacher(const SeqBatch& sb, const TokenBatch& batch,
                                   bool train, std::uint64_t step_seed) {
    std::vector<std::size_t> pos_ids(batch.batch * batch.steps);
    for (std::size_t b = 0; b < batch.batch; ++b)
        for (std::size_t t = 0; t < batch.steps; ++t)
            pos_ids[b * batch.steps + t] = t;
    Tensor x = ops::add(sb.data,
                        ops::gather_rows(params_.at("pos.table"), pos_ids));
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
        const std::string p = "l" + std::to_string(l);
        Tensor normed1 = ops::layer_norm(x, params_.at(p + ".ln1.gamma"),
                                         params_.at(p + ".ln1.beta"));
        SeqBatch hb{normed1, batch.batch, batch.steps, batch.mask};
        Tensor attn = layers::attention_multihead_batch(
            hb, mha_at(p + ".mha", cfg_.heads));
        x = ops::add(x, attn);
        Tensor normed2 = ops::layer_norm(x, params_.at(p + ".ln2.gamma"),
                                         params_.at(p + ".ln2.beta"));
        Tensor h1 = ops::gelu(ops::add_rowvec(
            ops::matmul(normed2, params_.at(p + ".ffn.w1")),
            params_.at(p + ".ffn.b1")));
        Tensor h2 = ops::add_rowvec(ops::matmul(h1, params_.at(p + ".ffn.w2")),
                                    params_.at(p + ".ffn.b2"));
        x = ops::add(x, h2);
    }
    x = ops::layer_norm(x, params_.at("final_ln.gamma"),
                        params_.at("final_ln.beta"));
    // classification anchor: the [CLS] position of every sample
    std::vector<std::size_t> cls_rows(batch.batch);
    for (std::size_t b = 0; b < batch.batch; ++b) cls_rows[b] = b * batch.steps;
    Tensor cls = ops::gather_rows(x, cls_rows);
    cls = ops::dropout(cls, cfg_.dropout, train, step_seed);
    return ops::add_rowvec(ops::matmul(cls, params_.at("head.w")),
                           params_.at("head.b"));
}

std::vector<double> ModelGraph::predict_proba(const TokenBatch& batch) {
    Tensor logits = forward(batch, /*train=*/false);
    std::vector<double> out(batch.batch);
    if (cfg_.kind == ModelKind::TinyTeacher) {
        for (std::size_t b = 0; b < batch.batch; ++b) {
            const double z0 = logits.at(b, 0), z1 = logits.at(b, 1);
            const double m = std::max(z0, z1);
            const double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
            out[b] = e1 / (e0 + e1);
        }
    } else {
        for (std::size_t b = 0; b < batch.batch; ++b) {
            const double z = logits.at(b, 0);
            out[b] = z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                            : std::exp(z) / (1.0 + std::exp(z));
        }
    }
    return out;
}

std::size_t ModelGraph::param_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : params_) n += t.numel();
    return n;
}

std::size_t ModelGraph::param_count_non_embedding() const {
    std::size_t n = 0;
    for (const auto& [name, t] : params_)
        if (name != "embed.table") n += t.numel();
    return n;
}

namespace {
constexpr const char* kConfigTensor = "__config__";
}

void ModelGraph::save(const std::string& path) const {
    layers::NamedTensors named;
    named.emplace_back(
        kConfigTensor,
        Tensor::from({double(static_cast<int>(cfg_.kind)), double(cfg_.vocab_size),
                      double(cfg_.embed_dim), double(cfg_.hidden),
                      double(cfg_.heads), double(cfg_.head_dim),
                      double(cfg_.layers), double(cfg_.ffn_dim),
                      double(cfg_.max_len), cfg_.dropout},
                     {10}));
    for (const auto& [name, t] : params_) named.emplace_back(name, t);
    layers::save_checkpoint(named, path);
}

ModelGraph ModelGraph::load(const std::string& path) {
    layers::NamedTensors named = layers::load_checkpoint(path);
    if (named.empty() || named[0].first != kConfigTensor)
        throw IoError("checkpoint " + path + " lacks a model config header");
    const auto& c = named[0].second;
    ModelConfig cfg;
    cfg.kind = static_cast<ModelKind>(int(c.at(0)));
    cfg.vocab_size = std::size_t(c.at(1));
    cfg.embed_dim = std::size_t(c.at(2));
    cfg.hidden = std::size_t(c.at(3));
    cfg.heads = std::size_t(c.at(4));
    cfg.head_dim = std::size_t(c.at(5));
    cfg.layers = std::size_t(c.at(6));
    cfg.ffn_dim = std::size_t(c.at(7));
    cfg.max_len = std::size_t(c.at(8));
    cfg.dropout = c.at(9);
    ModelGraph m(cfg, /*seed=*/0);
    for (std::size_t i = 1; i < named.size(); ++i) {
        auto it = m.params_.find(named[i].first);
        if (it == m.params_.end())
            throw IoError("checkpoint tensor \"" + named[i].first +
                          "\" does not belong to a " + to_string(cfg.kind));
        if (it->second.shape() != named[i].second.shape())
            throw IoError("checkpoint tensor \"" + named[i].first +
                          "\" has shape " +
                          ops::shape_str(named[i].second.shape()) +
                          ", expected " + ops::shape_str(it->second.shape()));
        it->second.mutable_data() = named[i].second.data();
    }
    return m;
}

void transfer_embeddings(ModelGraph& student, const ModelGraph& teacher) {
    Tensor dst = student.params().at("embed.table");
    Tensor src = teacher.params().at("embed.table");
    if (dst.shape() != src.shape())
        throw ContractError("transfer_embeddings: student table " +
                            ops::shape_str(dst.shape()) +
                            " does not match teacher table " +
                            ops::shape_str(src.shape()));
    dst.mutable_data() = src.data();
}

std::size_t param_count(const ModelGraph& m) { return m.param_count(); }

} // namespace phishkit::models
