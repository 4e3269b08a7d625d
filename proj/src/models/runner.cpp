#include "phishkit/models/runner.hpp"

#include <cmath>

#include "phishkit/error.hpp"

namespace phishkit::models {

namespace {

template <typename S>
S sigmoid1(S x) {
    if (x >= S(0)) return S(1) / (S(1) + std::exp(-x));
    const S e = std::exp(x);
    return e / (S(1) + e);
}

} // namespace

template <typename S>
InferenceRunner<S>::InferenceRunner(const ModelGraph& m) : cfg_(m.config()) {
    for (const auto& [name, t] : m.params()) {
        Mat mat;
        mat.r = t.rows();
        mat.c = t.shape().size() >= 2 ? t.cols() : t.numel();
        if (t.shape().size() == 1) mat.r = 1;
        mat.v.assign(t.data().begin(), t.data().end());
        params_[name] = std::move(mat);
    }
}

template <typename S>
const typename InferenceRunner<S>::Mat& InferenceRunner<S>::at(
    const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end())
        throw ContractError("InferenceRunner: missing parameter " + name);
    return it->second;
}

// y[mxn] += x[mxk] * w[kxn]
template <typename S>
static void mm_acc(const std::vector<S>& x, std::size_t m, std::size_t k,
                   const std::vector<S>& w, std::size_t n, std::vector<S>& y) {
    for (std::size_t i = 0; i < m; ++i) {
        const S* xr = x.data() + i * k;
        S* yr = y.data() + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const S xv = xr[l];
            const S* wr = w.data() + l * n;
            for (std::size_t j = 0; j < n; ++j) yr[j] += xv * wr[j];
        }
    }
}

template <typename S>
typename InferenceRunner<S>::Mat InferenceRunner<S>::lstm_scan(
    const Mat& emb, const TokenBatch& batch, const std::string& prefix,
    bool reverse, Mat* final_h) const {
    const Mat& w_f = at(prefix + ".w_f");
    const Mat& w_i = at(prefix + ".w_i");
    const Mat& w_c = at(prefix + ".w_c");
    const Mat& w_o = at(prefix + ".w_o");
    const Mat& b_f = at(prefix + ".b_f");
    const Mat& b_i = at(prefix + ".b_i");
    const Mat& b_c = at(prefix + ".b_c");
    const Mat& b_o = at(prefix + ".b_o");
    const std::size_t hidden = b_f.c;
    const std::size_t in_dim = emb.c;
    const std::size_t batch_n = batch.batch, steps = batch.steps;

    Mat out;
    out.r = batch_n * steps;
    out.c = hidden;
    out.v.assign(out.r * out.c, S(0));
    std::vector<S> h(batch_n * hidden, S(0)), c(batch_n * hidden, S(0));
    std::vector<S> hx(batch_n * (hidden + in_dim));
    std::vector<S> f(batch_n * hidden), i_g(batch_n * hidden),
        cand(batch_n * hidden), o_g(batch_n * hidden);

    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t t = reverse ? steps - 1 - k : k;
        for (std::size_t b = 0; b < batch_n; ++b) {
            S* dst = hx.data() + b * (hidden + in_dim);
            for (std::size_t j = 0; j < hidden; ++j) dst[j] = h[b * hidden + j];
            const S* src = emb.row(b * steps + t);
            for (std::size_t j = 0; j < in_dim; ++j) dst[hidden + j] = src[j];
        }
        auto gate = [&](const Mat& w, const Mat& bias, std::vector<S>& g,
                        bool tanh_act) {
            for (std::size_t b = 0; b < batch_n; ++b)
                for (std::size_t j = 0; j < hidden; ++j)
                    g[b * hidden + j] = bias.v[j];
            mm_acc(hx, batch_n, hidden + in_dim, w.v, hidden, g);
            for (auto& x : g) x = tanh_act ? std::tanh(x) : sigmoid1(x);
        };
        gate(w_f, b_f, f, false);
        gate(w_i, b_i, i_g, false);
        gate(w_c, b_c, cand, true);
        gate(w_o, b_o, o_g, false);
        for (std::size_t b = 0; b < batch_n; ++b) {
            if (batch.mask[b * steps + t] == 0.0) {
                // padded step: carry state, emit current h
                for (std::size_t j = 0; j < hidden; ++j)
                    out.v[(b * steps + t) * hidden + j] = h[b * hidden + j];
                continue;
            }
            for (std::size_t j = 0; j < hidden; ++j) {
                const std::size_t idx = b * hidden + j;
                c[idx] = f[idx] * c[idx] + i_g[idx] * cand[idx];
                h[idx] = o_g[idx] * std::tanh(c[idx]);
                out.v[(b * steps + t) * hidden + j] = h[idx];
            }
        }
    }
    if (final_h) {
        final_h->r = batch_n;
        final_h->c = hidden;
        final_h->v.assign(h.begin(), h.end());
    }
    return out;
}

template <typename S>
typename InferenceRunner<S>::Mat InferenceRunner<S>::attention(
    const Mat& h, const TokenBatch& batch, const std::string& prefix,
    std::size_t heads) const {
    const std::size_t batch_n = batch.batch, steps = batch.steps;
    std::vector<Mat> head_ctx(heads);
    for (std::size_t hd = 0; hd < heads; ++hd) {
        const std::string hp = prefix + ".head" + std::to_string(hd);
        const Mat& w_q = at(hp + ".w_q");
        const Mat& w_k = at(hp + ".w_k");
        const Mat& w_v = at(hp + ".w_v");
        const std::size_t d = w_q.c;
        Mat q{std::vector<S>(h.r * d, S(0)), h.r, d};
        Mat k{std::vector<S>(h.r * d, S(0)), h.r, d};
        Mat v{std::vector<S>(h.r * d, S(0)), h.r, d};
        mm_acc(h.v, h.r, h.c, w_q.v, d, q.v);
        mm_acc(h.v, h.r, h.c, w_k.v, d, k.v);
        mm_acc(h.v, h.r, h.c, w_v.v, d, v.v);
        Mat ctx{std::vector<S>(h.r * d, S(0)), h.r, d};
        const S inv_scale = S(1) / std::sqrt(S(d));
        std::vector<S> scores(steps);
        for (std::size_t b = 0; b < batch_n; ++b) {
            for (std::size_t qi = 0; qi < steps; ++qi) {
                const S* qrow = q.row(b * steps + qi);
                S mx = S(-1e30);
                for (std::size_t ki = 0; ki < steps; ++ki) {
                    if (batch.mask[b * steps + ki] == 0.0) {
                        scores[ki] = S(-1e30);
                        continue;
                    }
                    const S* krow = k.row(b * steps + ki);
                    S dot = S(0);
                    for (std::size_t j = 0; j < d; ++j) dot += qrow[j] * krow[j];
                    scores[ki] = dot * inv_scale;
                    mx = std::max(mx, scores[ki]);
                }
                S total = S(0);
                for (std::size_t ki = 0; ki < steps; ++ki) {
                    scores[ki] = std::exp(scores[ki] - mx);
                    total += scores[ki];
                }
                S* crow = ctx.row(b * steps + qi);
                for (std::size_t ki = 0; ki < steps; ++ki) {
                    const S w = scores[ki] / total;
                    if (w == S(0)) continue;
                    const S* vrow = v.row(b * steps + ki);
                    for (std::size_t j = 0; j < d; ++j) crow[j] += w * vrow[j];
                }
            }
        }
        head_ctx[hd] = std::move(ctx);
    }
    const Mat& w_o = at(prefix + ".w_o");
    const Mat& b_o = at(prefix + ".b_o");
    const std::size_t cat_w = w_o.r;
    Mat cat{std::vector<S>(h.r * cat_w), h.r, cat_w};
    std::size_t off = 0;
    for (const auto& hc : head_ctx) {
        for (std::size_t i = 0; i < h.r; ++i)
            for (std::size_t j = 0; j < hc.c; ++j)
                cat.v[i * cat_w + off + j] = hc.v[i * hc.c + j];
        off += hc.c;
    }
    Mat out{std::vector<S>(h.r * w_o.c), h.r, w_o.c};
    for (std::size_t i = 0; i < h.r; ++i)
        for (std::size_t j = 0; j < w_o.c; ++j) out.v[i * w_o.c + j] = b_o.v[j];
    mm_acc(cat.v, h.r, cat_w, w_o.v, w_o.c, out.v);
    return out;
}

template <typename S>
typename InferenceRunner<S>::Mat InferenceRunner<S>::pool(
    const Mat& x, const TokenBatch& batch) const {
    Mat out{std::vector<S>(batch.batch * x.c, S(0)), batch.batch, x.c};
    for (std::size_t b = 0; b < batch.batch; ++b) {
        S len = S(0);
        for (std::size_t t = 0; t < batch.steps; ++t)
            len += S(batch.mask[b * batch.steps + t]);
        if (len == S(0)) continue;
        S* dst = out.row(b);
        for (std::size_t t = 0; t < batch.steps; ++t) {
            if (batch.mask[b * batch.steps + t] == 0.0) continue;
            const S* src = x.row(b * batch.steps + t);
            for (std::size_t j = 0; j < x.c; ++j) dst[j] += src[j];
        }
        for (std::size_t j = 0; j < x.c; ++j) dst[j] /= len;
    }
    return out;
}

template <typename S>
std::vector<std::array<double, 2>> InferenceRunner<S>::student_forward(
    const TokenBatch& batch) const {
    const Mat& embed = at("embed.table");
    Mat emb{std::vector<S>(batch.ids.size() * cfg_.embed_dim), batch.ids.size(),
            cfg_.embed_dim};
    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
        const S* src = embed.row(batch.ids[i]);
        for (std::size_t j = 0; j < cfg_.embed_dim; ++j)
            emb.v[i * cfg_.embed_dim + j] = src[j];
    }

    Mat feat;
    switch (cfg_.kind) {
        case ModelKind::Lstm: {
            Mat final_h;
            lstm_scan(emb, batch, "lstm", false, &final_h);
            feat = std::move(final_h);
            break;
        }
        case ModelKind::Bilstm: {
            Mat ff, fb;
            lstm_scan(emb, batch, "lstm.fwd", false, &ff);
            lstm_scan(emb, batch, "lstm.bwd", true, &fb);
            feat.r = batch.batch;
            feat.c = ff.c + fb.c;
            feat.v.resize(feat.r * feat.c);
            for (std::size_t b = 0; b < batch.batch; ++b) {
                for (std::size_t j = 0; j < ff.c; ++j)
                    feat.v[b * feat.c + j] = ff.v[b * ff.c + j];
                for (std::size_t j = 0; j < fb.c; ++j)
                    feat.v[b * feat.c + ff.c + j] = fb.v[b * fb.c + j];
            }
            break;
        }
        case ModelKind::BilstmSh:
        case ModelKind::BilstmMh:
        case ModelKind::KdStudent: {
            Mat sf = lstm_scan(emb, batch, "lstm.fwd", false, nullptr);
            Mat sb = lstm_scan(emb, batch, "lstm.bwd", true, nullptr);
            Mat seq{std::vector<S>(sf.r * (sf.c + sb.c)), sf.r, sf.c + sb.c};
            for (std::size_t i = 0; i < sf.r; ++i) {
                for (std::size_t j = 0; j < sf.c; ++j)
                    seq.v[i * seq.c + j] = sf.v[i * sf.c + j];
                for (std::size_t j = 0; j < sb.c; ++j)
                    seq.v[i * seq.c + sf.c + j] = sb.v[i * sb.c + j];
            }
            Mat ctx;
            if (cfg_.kind == ModelKind::BilstmSh) {
                // single head stored under attn.* with no output projection
                const Mat& w_q = at("attn.w_q");
                const Mat& w_k = at("attn.w_k");
                const Mat& w_v = at("attn.w_v");
                const std::size_t d = w_q.c;
                Mat q{std::vector<S>(seq.r * d, S(0)), seq.r, d};
                Mat k{std::vector<S>(seq.r * d, S(0)), seq.r, d};
                Mat v{std::vector<S>(seq.r * d, S(0)), seq.r, d};
                mm_acc(seq.v, seq.r, seq.c, w_q.v, d, q.v);
                mm_acc(seq.v, seq.r, seq.c, w_k.v, d, k.v);
                mm_acc(seq.v, seq.r, seq.c, w_v.v, d, v.v);
                ctx = Mat{std::vector<S>(seq.r * d, S(0)), seq.r, d};
                const S inv_scale = S(1) / std::sqrt(S(d));
                std::vector<S> scores(batch.steps);
                for (std::size_t b = 0; b < batch.batch; ++b)
                    for (std::size_t qi = 0; qi < batch.steps; ++qi) {
                        const S* qrow = q.row(b * batch.steps + qi);
                        S mx = S(-1e30);
                        for (std::size_t ki = 0; ki < batch.steps; ++ki) {
                            if (batch.mask[b * batch.steps + ki] == 0.0) {
                                scores[ki] = S(-1e30);
                                continue;
                            }
                            const S* krow = k.row(b * batch.steps + ki);
                            S dot = S(0);
                            for (std::size_t j = 0; j < d; ++j)
                                dot += qrow[j] * krow[j];
                            scores[ki] = dot * inv_scale;
                            mx = std::max(mx, scores[ki]);
                        }
                        S total = S(0);
                        for (std::size_t ki = 0; ki < batch.steps; ++ki) {
                            scores[ki] = std::exp(scores[ki] - mx);
                            total += scores[ki];
                        }
                        S* crow = ctx.row(b * batch.steps + qi);
                        for (std::size_t ki = 0; ki < batch.steps; ++ki) {
                            const S w = scores[ki] / total;
                            if (w == S(0)) continue;
                            const S* vrow = v.row(b * batch.steps + ki);
                            for (std::size_t j = 0; j < d; ++j)
                                crow[j] += w * vrow[j];
                        }
                    }
            } else {
                ctx = attention(seq, batch, "mha", cfg_.heads);
            }
            feat = pool(ctx, batch);
            break;
        }
        default:
            throw ContractError("student_forward on a teacher runner");
    }

    const Mat& w = at("head.w");
    const Mat& b = at("head.b");
    std::vector<std::array<double, 2>> out(batch.batch);
    for (std::size_t i = 0; i < batch.batch; ++i) {
        S z = b.v[0];
        for (std::size_t j = 0; j < feat.c; ++j)
            z += feat.v[i * feat.c + j] * w.v[j];
        out[i] = {0.0, double(z)};
    }
    return out;
}

template <typename S>
std::vector<std::array<double, 2>> InferenceRunner<S>::teacher_forward(
    const TokenBatch& batch) const {
    const Mat& embed = at("embed.table");
    const Mat& pos = at("pos.table");
    const std::size_t d = cfg_.embed_dim;
    Mat x{std::vector<S>(batch.ids.size() * d), batch.ids.size(), d};
    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
        const std::size_t t = i % batch.steps;
        const S* e = embed.row(batch.ids[i]);
        const S* p = pos.row(t);
        for (std::size_t j = 0; j < d; ++j) x.v[i * d + j] = e[j] + p[j];
    }
    auto layer_norm = [&](const Mat& in, const Mat& gamma, const Mat& beta) {
        Mat out{std::vector<S>(in.v.size()), in.r, in.c};
        for (std::size_t i = 0; i < in.r; ++i) {
            const S* row = in.row(i);
            S mu = S(0);
            for (std::size_t j = 0; j < in.c; ++j) mu += row[j];
            mu /= S(in.c);
            S var = S(0);
            for (std::size_t j = 0; j < in.c; ++j) {
                const S dx = row[j] - mu;
                var += dx * dx;
            }
            var /= S(in.c);
            const S inv = S(1) / std::sqrt(var + S(1e-5));
            S* orow = out.row(i);
            for (std::size_t j = 0; j < in.c; ++j)
                orow[j] = gamma.v[j] * ((row[j] - mu) * inv) + beta.v[j];
        }
        return out;
    };
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
        const std::string p = "l" + std::to_string(l);
        Mat n1 = layer_norm(x, at(p + ".ln1.gamma"), at(p + ".ln1.beta"));
        Mat attn = attention(n1, batch, p + ".mha", cfg_.heads);
        for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] += attn.v[i];
        Mat n2 = layer_norm(x, at(p + ".ln2.gamma"), at(p + ".ln2.beta"));
        const Mat& w1 = at(p + ".ffn.w1");
        const Mat& b1 = at(p + ".ffn.b1");
        const Mat& w2 = at(p + ".ffn.w2");
        const Mat& b2 = at(p + ".ffn.b2");
        Mat h1{std::vector<S>(x.r * w1.c), x.r, w1.c};
        for (std::size_t i = 0; i < x.r; ++i)
            for (std::size_t j = 0; j < w1.c; ++j) h1.v[i * w1.c + j] = b1.v[j];
        mm_acc(n2.v, x.r, d, w1.v, w1.c, h1.v);
        for (auto& v : h1.v) {
            const S cdf = S(0.5) * (S(1) + std::erf(v * S(0.70710678118654752)));
            v = v * cdf;
        }
        Mat h2{std::vector<S>(x.r * d), x.r, d};
        for (std::size_t i = 0; i < x.r; ++i)
            for (std::size_t j = 0; j < d; ++j) h2.v[i * d + j] = b2.v[j];
        mm_acc(h1.v, x.r, w1.c, w2.v, d, h2.v);
        for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] += h2.v[i];
    }
    x = layer_norm(x, at("final_ln.gamma"), at("final_ln.beta"));
    const Mat& w = at("head.w");
    const Mat& b = at("head.b");
    std::vector<std::array<double, 2>> out(batch.batch);
    for (std::size_t bi = 0; bi < batch.batch; ++bi) {
        const S* cls = x.row(bi * batch.steps);
        S z0 = b.v[0], z1 = b.v[1];
        for (std::size_t j = 0; j < d; ++j) {
            z0 += cls[j] * w.v[j * 2];
            z1 += cls[j] * w.v[j * 2 + 1];
        }
        out[bi] = {double(z0), double(z1)};
    }
    return out;
}

template <typename S>
std::vector<std::array<double, 2>> InferenceRunner<S>::predict_logits(
    const TokenBatch& batch) const {
    if (cfg_.kind == ModelKind::TinyTeacher) return teacher_forward(batch);
    return student_forward(batch);
}

template <typename S>
std::vector<double> InferenceRunner<S>::predict_proba(
    const TokenBatch& batch) const {
    auto logits = predict_logits(batch);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double m = std::max(logits[i][0], logits[i][1]);
        const double e0 = std::exp(logits[i][0] - m);
        const double e1 = std::exp(logits[i][1] - m);
        out[i] = e1 / (e0 + e1);
    }
    return out;
}

template class InferenceRunner<float>;
template class InferenceRunner<double>;

} // namespace phishkit::models
