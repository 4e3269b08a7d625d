#include "phishkit/text/word2vec.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "phishkit/error.hpp"
#include "phishkit/numerics/rng.hpp"
#include "phishkit/text/vocab.hpp"

namespace phishkit::text {

using numerics::Rng;

void EmbeddingTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write embedding table " + path);
    out << dim << " " << rows() << "\n";
    char buf[32];
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", row(r)[c]);
            out << buf << (c + 1 == dim ? "" : " ");
        }
        out << "\n";
    }
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read embedding table " + path);
    EmbeddingTable t;
    std::size_t rows = 0;
    if (!(in >> t.dim >> rows))
        throw IoError("malformed embedding table header in " + path);
    t.data.resize(t.dim * rows);
    for (auto& v : t.data) {
        if (!(in >> v)) throw IoError("truncated embedding table " + path);
    }
    return t;
}

namespace {

double sigmoid1(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Cumulative unigram^(3/4) distribution for negative sampling.
struct NegativeSampler {
    std::vector<double> cdf;
    std::vector<std::size_t> ids;

    NegativeSampler(const std::vector<std::size_t>& counts) {
        double total = 0.0;
        for (std::size_t id = 0; id < counts.size(); ++id) {
            if (id == Vocab::kPad || counts[id] == 0) continue;
            total += std::pow(static_cast<double>(counts[id]), 0.75);
            ids.push_back(id);
            cdf.push_back(total);
        }
        for (auto& v : cdf) v /= total;
    }

    std::size_t draw(Rng& rng) const {
        const double u = rng.uniform();
        std::size_t lo = 0, hi = cdf.size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cdf[mid] < u)
                lo = mid + 1;
            else
                hi = mid;
        }
        return ids[lo < ids.size() ? lo : ids.size() - 1];
    }
};

struct PairUpdater {
    std::vector<double>& syn0;
    std::vector<double>& syn1;
    std::size_t dim;
    double lr;

    // One (input, output, label) update; returns the pair loss.
    double update_output(const double* h, double* grad_h, std::size_t out_id,
                         double label) {
        double* w = syn1.data() + out_id * dim;
        double z = 0.0;
        for (std::size_t c = 0; c < dim; ++c) z += h[c] * w[c];
        const double p = sigmoid1(z);
        const double g = (label - p) * lr;
        for (std::size_t c = 0; c < dim; ++c) {
            grad_h[c] += g * w[c];
            w[c] += g * h[c];
        }
        const double clamped = std::min(std::max(label > 0.5 ? p : 1.0 - p,
                                                 1e-10),
                                        1.0);
        return -std::log(clamped);
    }
};

} // namespace

Word2VecResult train_embeddings(const std::vector<TokenSequence>& corpus,
                                std::size_t vocab_size,
                                const Word2VecConfig& cfg) {
    if (corpus.empty()) throw ParameterError("train_embeddings: empty corpus");
    if (cfg.dim < 2) throw ParameterError("train_embeddings: dim must be >= 2");
    if (vocab_size < cfg.negatives + 1)
        throw ParameterError("train_embeddings: vocab size " +
                             std::to_string(vocab_size) +
                             " smaller than negatives+1 = " +
                             std::to_string(cfg.negatives + 1));

    std::vector<std::size_t> counts(vocab_size, 0);
    std::size_t total_tokens = 0;
    for (const auto& seq : corpus) {
        for (std::size_t id : seq.ids) {
            if (id >= vocab_size)
                throw ParameterError("train_embeddings: token id out of range");
            if (id == Vocab::kPad) continue;
            ++counts[id];
            ++total_tokens;
        }
    }
    if (total_tokens == 0)
        throw ParameterError("train_embeddings: corpus has no trainable tokens");

    Rng rng(numerics::derive_seed(cfg.seed, 0x77327665ULL));
    std::vector<double> syn0(vocab_size * cfg.dim);
    std::vector<double> syn1(vocab_size * cfg.dim, 0.0);
    const double half = 0.5 / static_cast<double>(cfg.dim);
    for (std::size_t i = 0; i < syn0.size(); ++i)
        syn0[i] = rng.uniform(-half, half);
    for (std::size_t c = 0; c < cfg.dim; ++c) syn0[Vocab::kPad * cfg.dim + c] = 0.0;

    NegativeSampler sampler(counts);
    PairUpdater upd{syn0, syn1, cfg.dim, cfg.lr};

    const double total_steps =
        static_cast<double>(cfg.epochs) * static_cast<double>(total_tokens);
    const double min_lr = cfg.lr * 1e-2;
    double processed = 0.0;

    Word2VecResult result;
    std::vector<double> h(cfg.dim);
    std::vector<double> grad_h(cfg.dim);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (const auto& seq : corpus) {
            std::vector<std::size_t> toks;
            for (std::size_t id : seq.ids)
                if (id != Vocab::kPad) toks.push_back(id);
            for (std::size_t i = 0; i < toks.size(); ++i) {
                upd.lr = std::max(min_lr,
                                  cfg.lr * (1.0 - processed / total_steps));
                processed += 1.0;
                const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
                const std::size_t hi =
                    std::min(toks.size(), i + cfg.window + 1);
                if (cfg.mode == Word2VecConfig::Mode::SkipGram) {
                    const std::size_t center = toks[i];
                    double* vin = syn0.data() + center * cfg.dim;
                    for (std::size_t j = lo; j < hi; ++j) {
                        if (j == i) continue;
                        std::fill(grad_h.begin(), grad_h.end(), 0.0);
                        loss_sum += upd.update_output(vin, grad_h.data(),
                                                      toks[j], 1.0);
                        for (std::size_t k = 0; k < cfg.negatives; ++k) {
                            std::size_t neg = sampler.draw(rng);
                            if (neg == toks[j]) continue;
                            loss_sum += upd.update_output(vin, grad_h.data(),
                                                          neg, 0.0);
                        }
                        ++loss_count;
                        for (std::size_t c = 0; c < cfg.dim; ++c)
                            vin[c] += grad_h[c];
                    }
                } else { // CBOW: mean of context predicts the center
                    std::fill(h.begin(), h.end(), 0.0);
                    std::size_t ctx = 0;
                    for (std::size_t j = lo; j < hi; ++j) {
                        if (j == i) continue;
                        const double* v = syn0.data() + toks[j] * cfg.dim;
                        for (std::size_t c = 0; c < cfg.dim; ++c) h[c] += v[c];
                        ++ctx;
                    }
                    if (ctx == 0) continue;
                    for (std::size_t c = 0; c < cfg.dim; ++c)
                        h[c] /= static_cast<double>(ctx);
                    std::fill(grad_h.begin(), grad_h.end(), 0.0);
                    loss_sum +=
                        upd.update_output(h.data(), grad_h.data(), toks[i], 1.0);
                    for (std::size_t k = 0; k < cfg.negatives; ++k) {
                        std::size_t neg = sampler.draw(rng);
                        if (neg == toks[i]) continue;
                        loss_sum += upd.update_output(h.data(), grad_h.data(),
                                                      neg, 0.0);
                    }
                    ++loss_count;
                    for (std::size_t j = lo; j < hi; ++j) {
                        if (j == i) continue;
                        double* v = syn0.data() + toks[j] * cfg.dim;
                        for (std::size_t c = 0; c < cfg.dim; ++c)
                            v[c] += grad_h[c] / static_cast<double>(ctx);
                    }
                }
            }
        }
        result.epoch_loss.push_back(loss_count == 0
                                        ? 0.0
                                        : loss_sum / double(loss_count));
    }

    result.table.dim = cfg.dim;
    result.table.data = std::move(syn0);
    for (std::size_t c = 0; c < cfg.dim; ++c) result.table.data[c] = 0.0; // [PAD]
    return result;
}

std::vector<double> email_vector_mean(const TokenSequence& seq,
                                      const EmbeddingTable& table,
                                      bool* all_pad) {
    std::vector<double> out(table.dim, 0.0);
    std::size_t n = 0;
    for (std::size_t id : seq.ids) {
        if (id == Vocab::kPad) continue;
        if (id >= table.rows())
            throw ParameterError("email_vector_mean: token id out of range");
        const double* r = table.row(id);
        for (std::size_t c = 0; c < table.dim; ++c) out[c] += r[c];
        ++n;
    }
    if (all_pad) *all_pad = (n == 0);
    if (n > 0)
        for (auto& v : out) v /= static_cast<double>(n);
    return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw ContractError("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace phishkit::text
