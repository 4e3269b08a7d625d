#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "phishkit/corpus/generator.hpp"
#include "phishkit/corpus/scoring.hpp"
#include "phishkit/corpus/tfidf.hpp"
#include "phishkit/error.hpp"
#include "phishkit/evalbench/bench.hpp"
#include "phishkit/evalbench/scenario.hpp"
#include "phishkit/models/logits.hpp"
#include "phishkit/text/normalize.hpp"
#include "phishkit/text/vocab.hpp"
#include "phishkit/training/distill.hpp"

namespace fs = std::filesystem;
using namespace phishkit;

namespace {

// --- manifest support -------------------------------------------------------

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash missing file " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[8192];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)v);
    return buf;
}

// Flat key=value config; '#' lines are comments.
std::vector<std::pair<std::string, std::string>> load_flat_config(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError("config " + path + ": expected key=value, got \"" +
                          line + "\"");
        out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return out;
}

struct Manifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> keys;
    std::vector<std::string> artifacts;

    void set(const std::string& k, const std::string& v) {
        keys.emplace_back(k, v);
    }
    void set(const std::string& k, double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        keys.emplace_back(k, buf);
    }
    void set(const std::string& k, std::uint64_t v) {
        keys.emplace_back(k, std::to_string(v));
    }
    void set(const std::string& k, bool v) {
        keys.emplace_back(k, v ? "true" : "false");
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write manifest " + path);
        out << "command=" << command << "\n";
        for (const auto& [k, v] : keys) out << k << "=" << v << "\n";
        for (const auto& a : artifacts)
            out << "# hash " << fs::path(a).filename().string() << " "
                << hex64(fnv1a_file(a)) << "\n";
    }
};

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory " + out);
    return dir;
}

// --- shared command state ---------------------------------------------------

struct GlobalOpts {
    std::uint64_t seed = 7;
    std::string out = "out";
    std::string mode = "f64";
};

corpus::LoadResult load_corpus_checked(const std::string& path) {
    if (!fs::exists(path)) throw IoError("corpus file not found: " + path);
    auto loaded = corpus::load_corpus(path);
    for (const auto& r : loaded.rejected)
        std::cerr << "warning: rejected corpus line " << r.line << ": "
                  << r.reason << "\n";
    return loaded;
}

training::Dataset build_dataset(const std::vector<corpus::EmailRecord>& records,
                                const std::vector<std::size_t>& idx,
                                const text::Vocab& vocab, text::TokenMode mode,
                                std::size_t max_len) {
    training::Dataset d;
    for (std::size_t i : idx) {
        const std::string norm =
            text::normalize_email(records[i].text(), mode);
        d.seqs.push_back(mode == text::TokenMode::Word
                             ? text::tokenize_word(norm, vocab, max_len)
                             : text::tokenize_wordpiece(norm, vocab, max_len));
        d.labels.push_back(records[i].label == corpus::Label::Phishing ? 1 : 0);
        d.ids.push_back(records[i].id);
    }
    return d;
}

// Stratified holdout: one seeded shuffle per class, first val_frac to val.
void split_train_val(const std::vector<corpus::EmailRecord>& records,
                     double val_frac, std::uint64_t seed,
                     std::vector<std::size_t>& train_idx,
                     std::vector<std::size_t>& val_idx) {
    std::vector<std::size_t> phish, legit;
    for (std::size_t i = 0; i < records.size(); ++i)
        (records[i].label == corpus::Label::Phishing ? phish : legit).push_back(i);
    numerics::Rng rng(numerics::derive_seed(seed, 0x76616cULL));
    rng.shuffle(phish);
    rng.shuffle(legit);
    for (const auto* cls : {&phish, &legit}) {
        const std::size_t n_val =
            std::size_t(double(cls->size()) * val_frac + 0.5);
        for (std::size_t i = 0; i < cls->size(); ++i)
            (i < n_val ? val_idx : train_idx).push_back((*cls)[i]);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
}

// --- gen-corpus ---------------------------------------------------------------

struct GenCorpusOpts {
    std::size_t n = 500;
    std::size_t vocab_size = 64;
    bool dedup = false;
    double dedup_threshold = 0.9;
};

int cmd_gen_corpus(const GlobalOpts& g, const GenCorpusOpts& o) {
    fs::path dir = ensure_out_dir(g.out);
    corpus::GenConfig gc;
    gc.n_per_cell = o.n;
    gc.seed = g.seed;
    gc.vocab_size = o.vocab_size;
    auto records = corpus::generate_synthetic_corpus(gc);

    std::size_t removed = 0;
    if (o.dedup) {
        auto result = corpus::dedup(records, o.dedup_threshold);
        removed = result.removed.size();
        records = std::move(result.kept);
    }
    const std::string corpus_path = (dir / "corpus.jsonl").string();
    corpus::save_corpus(records, corpus_path);

    std::vector<corpus::EmailRecord> legit, ph, pl;
    for (const auto& r : records) {
        if (r.label == corpus::Label::Legitimate) legit.push_back(r);
        else if (r.source == corpus::Source::Human) ph.push_back(r);
        else pl.push_back(r);
    }
    const std::string sim_path = (dir / "similarity.csv").string();
    corpus::SimilarityReport sim;
    const bool have_all = !legit.empty() && !ph.empty() && !pl.empty();
    if (have_all) {
        sim = corpus::similarity_analysis(legit, ph, pl);
        corpus::save_similarity_csv(sim, sim_path);
    }

    double phish_score = 0.0, legit_score = 0.0;
    for (const auto& r : records) {
        corpus::ScoreSheet sheet = corpus::score_email(r);
        (r.label == corpus::Label::Phishing ? phish_score : legit_score) +=
            sheet.composite;
    }
    const std::size_t n_phish = ph.size() + pl.size();

    const std::string summary_path = (dir / "summary.txt").string();
    {
        std::ofstream out(summary_path);
        out << "records=" << records.size() << "\n";
        out << "removed_duplicates=" << removed << "\n";
        char buf[64];
        if (have_all) {
            std::snprintf(buf, sizeof(buf), "%.6f", sim.vs_human.mean);
            out << "mean_cosine_legit_vs_human_phish=" << buf << "\n";
            std::snprintf(buf, sizeof(buf), "%.6f", sim.vs_llm.mean);
            out << "mean_cosine_legit_vs_llm_phish=" << buf << "\n";
        }
        if (n_phish > 0) {
            std::snprintf(buf, sizeof(buf), "%.6f",
                          phish_score / double(n_phish));
            out << "mean_phishing_score_phish=" << buf << "\n";
        }
        if (records.size() > n_phish) {
            std::snprintf(buf, sizeof(buf), "%.6f",
                          legit_score / double(records.size() - n_phish));
            out << "mean_phishing_score_legit=" << buf << "\n";
        }
    }

    Manifest m;
    m.command = "gen-corpus";
    m.set("seed", g.seed);
    m.set("out", g.out);
    m.set("mode", g.mode);
    m.set("n", o.n);
    m.set("vocab-size", o.vocab_size);
    m.set("dedup", o.dedup);
    m.set("dedup-threshold", o.dedup_threshold);
    m.artifacts = {corpus_path, summary_path};
    if (have_all) m.artifacts.push_back(sim_path);
    m.write((dir / "manifest.txt").string());

    std::cout << "wrote " << records.size() << " records to " << corpus_path
              << "\n";
    return 0;
}

// --- train --------------------------------------------------------------------

struct TrainOpts {
    std::string corpus;
    std::string model = "bilstm";
    double lr = 1e-3;
    std::size_t epochs = 5;
    std::size_t batch_size = 32;
    double val_frac = 0.1;
    std::size_t vocab_cap = 4000;
    std::size_t embed_dim = 0;
    std::size_t hidden = 0;
    std::size_t max_len = 0;
    bool freeze_embeddings = false;
};

int cmd_train(const GlobalOpts& g, const TrainOpts& o) {
    fs::path dir = ensure_out_dir(g.out);
    models::ModelKind kind = models::model_kind_from(o.model);
    auto loaded = load_corpus_checked(o.corpus);
    if (loaded.records.empty()) throw IoError("corpus is empty: " + o.corpus);

    const text::TokenMode mode =
        (kind == models::ModelKind::KdStudent ||
         kind == models::ModelKind::TinyTeacher)
            ? text::TokenMode::WordPiece
            : text::TokenMode::Word;

    std::vector<std::size_t> train_idx, val_idx;
    split_train_val(loaded.records, o.val_frac, g.seed, train_idx, val_idx);

    std::vector<std::string> train_texts;
    for (std::size_t i : train_idx)
        train_texts.push_back(
            text::normalize_email(loaded.records[i].text(), mode));
    const text::Vocab vocab =
        mode == text::TokenMode::Word
            ? text::build_vocab(train_texts, o.vocab_cap, 1)
            : text::build_wordpiece_vocab(train_texts, o.vocab_cap, 1);

    models::ModelConfig cfg = models::ModelConfig::desk_default(kind);
    cfg.vocab_size = vocab.size();
    if (o.embed_dim) cfg.embed_dim = o.embed_dim;
    if (o.hidden) cfg.hidden = o.hidden;
    if (o.max_len) cfg.max_len = o.max_len;

    training::Dataset train_ds =
        build_dataset(loaded.records, train_idx, vocab, mode, cfg.max_len);
    training::Dataset val_ds =
        build_dataset(loaded.records, val_idx, vocab, mode, cfg.max_len);

    models::ModelGraph model(cfg, numerics::derive_seed(g.seed, 0x696e6974ULL));
    model.set_freeze_embeddings(o.freeze_embeddings);
    training::TrainConfig tc;
    tc.lr = o.lr;
    tc.epochs = o.epochs;
    tc.batch_size = o.batch_size;
    tc.seed = numerics::derive_seed(g.seed, 0x747261696eULL);
    training::History history = training::train(model, train_ds, val_ds, tc);

    const std::string ckpt_path = (dir / "model.ckpt").string();
    const std::string vocab_path = (dir / "vocab.txt").string();
    const std::string history_path = (dir / "history.csv").string();
    model.save(ckpt_path);
    vocab.save(vocab_path);
    history.save_csv(history_path);

    Manifest m;
    m.command = "train";
    m.set("seed", g.seed);
    m.set("out", g.out);
    m.set("mode", g.mode);
    m.set("corpus", o.corpus);
    m.set("model", o.model);
    m.set("lr", o.lr);
    m.set("epochs", o.epochs);
    m.set("batch-size", o.batch_size);
    m.set("val-frac", o.val_frac);
    m.set("vocab-cap", o.vocab_cap);
    m.set("embed-dim", o.embed_dim);
    m.set("hidden", o.hidden);
    m.set("max-len", o.max_len);
    m.set("freeze-embeddings", o.freeze_embeddings);
    m.artifacts = {ckpt_path, vocab_path, history_path};
    m.write((dir / "manifest.txt").string());

    if (!history.epochs.empty() && history.epochs.back().has_val) {
        std::cout << "final val_acc=" << history.epochs.back().val_acc
                  << " val_f1=" << history.epochs.back().val_f1 << "\n";
    }
    std::cout << "checkpoint " << ckpt_path << " (params "
              << model.param_count() << ")\n";
    return 0;
}

// --- distill ------------------------------------------------------------------

struct DistillOpts {
    std::string corpus;
    std::string teacher_ckpt;
    std::string teacher_logits;
    std::string vocab;
    double alpha = 0.5;
    double tau = 2.0;
    double lr = 1e-4;
    std::size_t epochs = 3;
    std::size_t batch_size = 32;
    std::size_t warmup_epochs = 5;
    double warmup_lr = 1e-3;
    double val_frac = 0.1;
    std::size_t vocab_cap = 4000;
    std::size_t hidden = 0;
    std::size_t max_len = 0;
    bool freeze_embeddings = false;
};

int cmd_distill(const GlobalOpts& g, const DistillOpts& o) {
    fs::path dir = ensure_out_dir(g.out);
    if (o.teacher_ckpt.empty() && o.teacher_logits.empty())
        throw ParameterError(
            "distill requires --teacher-ckpt or --teacher-logits");
    auto loaded = load_corpus_checked(o.corpus);
    if (loaded.records.empty()) throw IoError("corpus is empty: " + o.corpus);

    std::vector<std::size_t> train_idx, val_idx;
    split_train_val(loaded.records, o.val_frac, g.seed, train_idx, val_idx);

    // teacher side: checkpoint (with its vocab) or an imported logit table
    std::optional<models::ModelGraph> teacher;
    models::TeacherLogits table;
    text::Vocab vocab;
    if (!o.teacher_ckpt.empty()) {
        if (!fs::exists(o.teacher_ckpt))
            throw IoError("teacher checkpoint not found: " + o.teacher_ckpt);
        teacher = models::ModelGraph::load(o.teacher_ckpt);
        if (o.vocab.empty())
            throw ParameterError("--vocab (the teacher's vocab file) is "
                                 "required with --teacher-ckpt");
        vocab = text::Vocab::load(o.vocab);
    } else {
        if (!fs::exists(o.teacher_logits))
            throw IoError("teacher logits not found: " + o.teacher_logits);
        table = models::load_teacher_logits(o.teacher_logits);
        std::vector<std::string> train_texts;
        for (std::size_t i : train_idx)
            train_texts.push_back(text::normalize_email(
                loaded.records[i].text(), text::TokenMode::WordPiece));
        vocab = text::build_wordpiece_vocab(train_texts, o.vocab_cap, 1);
    }

    models::ModelConfig cfg =
        models::ModelConfig::desk_default(models::ModelKind::KdStudent);
    cfg.vocab_size = vocab.size();
    if (teacher) {
        cfg.vocab_size = teacher->config().vocab_size;
        cfg.embed_dim = teacher->config().embed_dim;
        cfg.max_len = teacher->config().max_len;
    }
    if (o.hidden) {
        cfg.hidden = o.hidden;
        cfg.head_dim = std::max<std::size_t>(1, 2 * o.hidden / cfg.heads);
    }
    if (o.max_len) cfg.max_len = o.max_len;

    training::Dataset train_ds =
        build_dataset(loaded.records, train_idx, vocab,
                      text::TokenMode::WordPiece, cfg.max_len);
    training::Dataset val_ds = build_dataset(
        loaded.records, val_idx, vocab, text::TokenMode::WordPiece, cfg.max_len);

    models::ModelGraph student(cfg, numerics::derive_seed(g.seed, 0x6b64ULL));
    if (teacher) models::transfer_embeddings(student, *teacher);
    student.set_freeze_embeddings(o.freeze_embeddings);

    training::History history;
    if (o.warmup_epochs > 0) {
        training::TrainConfig wc;
        wc.lr = o.warmup_lr;
        wc.epochs = o.warmup_epochs;
        wc.batch_size = o.batch_size;
        wc.seed = numerics::derive_seed(g.seed, 0x7761726dULL);
        training::train(student, train_ds, val_ds, wc);
    }
    training::DistillConfig dc;
    dc.alpha = o.alpha;
    dc.tau = o.tau;
    dc.lr = o.lr;
    dc.epochs = o.epochs;
    dc.batch_size = o.batch_size;
    dc.seed = numerics::derive_seed(g.seed, 0x64697374ULL);
    if (teacher) {
        history = training::distill_train(student, &*teacher, train_ds, val_ds, dc);
    } else {
        history = training::distill_train(student, &table, train_ds, val_ds, dc);
    }

    const std::string ckpt_path = (dir / "student.ckpt").string();
    const std::string vocab_path = (dir / "vocab.txt").string();
    const std::string history_path = (dir / "history.csv").string();
    student.save(ckpt_path);
    vocab.save(vocab_path);
    history.save_csv(history_path);

    Manifest m;
    m.command = "distill";
    m.set("seed", g.seed);
    m.set("out", g.out);
    m.set("mode", g.mode);
    m.set("corpus", o.corpus);
    m.set("teacher-ckpt", o.teacher_ckpt);
    m.set("teacher-logits", o.teacher_logits);
    m.set("vocab", o.vocab);
    m.set("alpha", o.alpha);
    m.set("tau", o.tau);
    m.set("lr", o.lr);
    m.set("epochs", o.epochs);
    m.set("batch-size", o.batch_size);
    m.set("warmup-epochs", o.warmup_epochs);
    m.set("warmup-lr", o.warmup_lr);
    m.set("val-frac", o.val_frac);
    m.set("vocab-cap", o.vocab_cap);
    m.set("hidden", o.hidden);
    m.set("max-len", o.max_len);
    m.set("freeze-embeddings", o.freeze_embeddings);
    m.artifacts = {ckpt_path, vocab_path, history_path};
    m.write((dir / "manifest.txt").string());

    if (!history.epochs.empty() && history.epochs.back().has_val)
        std::cout << "final val_f1=" << history.epochs.back().val_f1 << "\n";
    std::cout << "student checkpoint " << ckpt_path << "\n";
    return 0;
}

// --- eval ---------------------------------------------------------------------

struct EvalOpts {
    std::string corpus;
    std::string scenario = "all";
    std::string models_list = "lstm,bilstm,bilstm_sh,bilstm_mh,kd_student";
    std::size_t folds = 5;
    std::size_t vocab_cap = 4000;
    std::size_t embed_dim = 0;
    std::size_t hidden = 0;
    std::size_t epochs = 5;
    std::size_t teacher_epochs = 8;
    std::size_t distill_epochs = 3;
    std::size_t warmup_epochs = 5;
};

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_eval(const GlobalOpts& g, const EvalOpts& o) {
    fs::path dir = ensure_out_dir(g.out);
    auto loaded = load_corpus_checked(o.corpus);
    if (loaded.records.empty()) throw IoError("corpus is empty: " + o.corpus);

    std::vector<evalbench::ScenarioSpec> specs;
    if (o.scenario == "all") {
        for (const auto& name : evalbench::ScenarioSpec::names())
            specs.push_back(evalbench::ScenarioSpec::parse(name));
    } else {
        specs.push_back(evalbench::ScenarioSpec::parse(o.scenario));
    }
    std::vector<models::ModelKind> kinds;
    for (const auto& name : split_list(o.models_list))
        kinds.push_back(models::model_kind_from(name));
    if (kinds.empty()) throw ParameterError("eval: empty model list");

    evalbench::ScenarioRunConfig rc = evalbench::ScenarioRunConfig::desk_default();
    rc.seed = g.seed;
    rc.folds = o.folds;
    rc.vocab_cap = o.vocab_cap;
    rc.embed_dim = o.embed_dim;
    rc.hidden = o.hidden;
    rc.student_budget.epochs = o.epochs;
    rc.teacher_budget.epochs = o.teacher_epochs;
    rc.distill_budget.epochs = o.distill_epochs;
    rc.kd_warmup_epochs = o.warmup_epochs;

    std::vector<evalbench::ScenarioReport> reports;
    for (const auto& spec : specs) {
        for (models::ModelKind kind : kinds) {
            std::cout << "scenario " << spec.str() << " model "
                      << models::to_string(kind) << "..." << std::flush;
            reports.push_back(
                evalbench::run_scenario(loaded.records, kind, spec, rc));
            const auto& r = reports.back();
            std::cout << " mean f1=" << r.mean.f1
                      << " wf1=" << r.mean.weighted_f1 << "\n";
        }
    }
    const std::string metrics_path = (dir / "metrics.csv").string();
    evalbench::save_metrics_csv(reports, metrics_path);

    Manifest m;
    m.command = "eval";
    m.set("seed", g.seed);
    m.set("out", g.out);
    m.set("mode", g.mode);
    m.set("corpus", o.corpus);
    m.set("scenario", o.scenario);
    m.set("models", o.models_list);
    m.set("folds", o.folds);
    m.set("vocab-cap", o.vocab_cap);
    m.set("embed-dim", o.embed_dim);
    m.set("hidden", o.hidden);
    m.set("epochs", o.epochs);
    m.set("teacher-epochs", o.teacher_epochs);
    m.set("distill-epochs", o.distill_epochs);
    m.set("warmup-epochs", o.warmup_epochs);
    m.artifacts = {metrics_path};
    m.write((dir / "manifest.txt").string());

    std::cout << "metrics " << metrics_path << "\n";
    return 0;
}

// --- bench --------------------------------------------------------------------

struct BenchOpts {
    std::string models_list = "kd_student,tiny_teacher";
    std::size_t batch_size = 32;
    std::size_t seq_len = 48;
    std::size_t repeats = 30;
    std::size_t train_batches = 8;
    std::size_t vocab_size = 30000;
};

int cmd_bench(const GlobalOpts& g, const BenchOpts& o) {
    fs::path dir = ensure_out_dir(g.out);
    std::vector<std::unique_ptr<models::ModelGraph>> graphs;
    std::vector<models::ModelGraph*> ptrs;
    for (const auto& name : split_list(o.models_list)) {
        models::ModelConfig cfg =
            models::ModelConfig::paper_default(models::model_kind_from(name));
        cfg.vocab_size = o.vocab_size;
        graphs.push_back(std::make_unique<models::ModelGraph>(
            cfg, numerics::derive_seed(g.seed, graphs.size())));
        ptrs.push_back(graphs.back().get());
    }
    if (ptrs.empty()) throw ParameterError("bench: empty model list");

    evalbench::BenchConfig bc;
    bc.batch_size = o.batch_size;
    bc.seq_len = o.seq_len;
    bc.repeats = o.repeats;
    bc.train_batches = o.train_batches;
    bc.f32 = g.mode == "f32";
    bc.seed = g.seed;
    auto reports = evalbench::benchmark(ptrs, bc);

    const std::string bench_path = (dir / "bench.csv").string();
    evalbench::save_bench_csv(reports, bench_path);

    Manifest m;
    m.command = "bench";
    m.set("seed", g.seed);
    m.set("out", g.out);
    m.set("mode", g.mode);
    m.set("models", o.models_list);
    m.set("batch-size", o.batch_size);
    m.set("seq-len", o.seq_len);
    m.set("repeats", o.repeats);
    m.set("train-batches", o.train_batches);
    m.set("vocab-size", o.vocab_size);
    m.artifacts = {bench_path};
    m.write((dir / "manifest.txt").string());

    for (const auto& r : reports)
        std::cout << r.model << ": params=" << r.params
                  << " p50=" << r.p50_ms << "ms p95=" << r.p95_ms << "ms\n";
    return 0;
}

// --- argv plumbing ------------------------------------------------------------

// Injects config key=value pairs as tokens right after the subcommand so
// explicit flags (parsed later) win.
std::vector<std::string> splice_config(const std::vector<std::string>& args,
                                       std::string* config_command) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;
    auto kv = load_flat_config(config_path);
    std::vector<std::string> tokens;
    for (const auto& [k, v] : kv) {
        if (k == "command") {
            *config_command = v;
            continue;
        }
        if (v.empty()) continue; // empty value means the option was unset
        tokens.push_back("--" + k + "=" + v);
    }
    // insert after the first non-flag token (the subcommand name)
    std::vector<std::string> out;
    bool inserted = false;
    for (const auto& a : args) {
        out.push_back(a);
        if (!inserted && !a.empty() && a[0] != '-') {
            out.insert(out.end(), tokens.begin(), tokens.end());
            inserted = true;
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequence-classification toolkit: synthetic phishing corpora, "
                 "BiLSTM/attention students, a tiny transformer teacher, "
                 "knowledge distillation, scenario evaluation and latency "
                 "benchmarks"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "root RNG seed")->capture_default_str();
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--mode", g.mode, "numerics mode for benchmarks")
        ->check(CLI::IsMember({"f64", "f32"}))
        ->capture_default_str();
    std::string config_file;
    app.add_option("--config", config_file,
                   "flat key=value config (flags override)");

    GenCorpusOpts gen;
    auto* sub_gen = app.add_subcommand("gen-corpus",
                                       "generate the synthetic corpus");
    sub_gen->add_option("--n", gen.n, "records per (label, source) cell")
        ->capture_default_str();
    sub_gen->add_option("--vocab-size", gen.vocab_size, "slot pool richness")
        ->capture_default_str();
    sub_gen->add_flag("--dedup", gen.dedup, "drop near-duplicates");
    sub_gen
        ->add_option("--dedup-threshold", gen.dedup_threshold,
                     "cosine threshold in (0, 1]")
        ->check(CLI::Range(1e-9, 1.0))
        ->capture_default_str();

    TrainOpts tr;
    auto* sub_train = app.add_subcommand("train", "train one model");
    sub_train->add_option("--corpus", tr.corpus, "corpus JSONL")->required();
    sub_train->add_option("--model", tr.model, "model kind")
        ->capture_default_str();
    sub_train->add_option("--lr", tr.lr, "learning rate")->capture_default_str();
    sub_train->add_option("--epochs", tr.epochs, "epochs")->capture_default_str();
    sub_train->add_option("--batch-size", tr.batch_size, "batch size")
        ->capture_default_str();
    sub_train->add_option("--val-frac", tr.val_frac, "validation fraction")
        ->check(CLI::Range(0.0, 0.5))
        ->capture_default_str();
    sub_train->add_option("--vocab-cap", tr.vocab_cap, "vocabulary cap")
        ->capture_default_str();
    sub_train->add_option("--embed-dim", tr.embed_dim, "embedding width (0=default)")
        ->capture_default_str();
    sub_train->add_option("--hidden", tr.hidden, "hidden width (0=default)")
        ->capture_default_str();
    sub_train->add_option("--max-len", tr.max_len, "sequence cap (0=default)")
        ->capture_default_str();
    sub_train->add_flag("--freeze-embeddings", tr.freeze_embeddings,
                        "keep the embedding table fixed");

    DistillOpts di;
    auto* sub_distill =
        app.add_subcommand("distill", "distill a teacher into the kd student");
    sub_distill->add_option("--corpus", di.corpus, "corpus JSONL")->required();
    sub_distill->add_option("--teacher-ckpt", di.teacher_ckpt,
                            "teacher checkpoint");
    sub_distill->add_option("--teacher-logits", di.teacher_logits,
                            "teacher logits CSV");
    sub_distill->add_option("--vocab", di.vocab,
                            "teacher vocab file (with --teacher-ckpt)");
    sub_distill->add_option("--alpha", di.alpha, "hard-loss weight")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sub_distill->add_option("--tau", di.tau, "softening temperature")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub_distill->add_option("--lr", di.lr, "distillation learning rate")
        ->capture_default_str();
    sub_distill->add_option("--epochs", di.epochs, "distillation epochs")
        ->capture_default_str();
    sub_distill->add_option("--batch-size", di.batch_size, "batch size")
        ->capture_default_str();
    sub_distill->add_option("--warmup-epochs", di.warmup_epochs,
                            "hard-label warm-up epochs before distillation")
        ->capture_default_str();
    sub_distill->add_option("--warmup-lr", di.warmup_lr, "warm-up learning rate")
        ->capture_default_str();
    sub_distill->add_option("--val-frac", di.val_frac, "validation fraction")
        ->check(CLI::Range(0.0, 0.5))
        ->capture_default_str();
    sub_distill->add_option("--vocab-cap", di.vocab_cap, "vocabulary cap")
        ->capture_default_str();
    sub_distill->add_option("--hidden", di.hidden, "hidden width (0=default)")
        ->capture_default_str();
    sub_distill->add_option("--max-len", di.max_len, "sequence cap (0=default)")
        ->capture_default_str();
    sub_distill->add_flag("--freeze-embeddings", di.freeze_embeddings,
                          "freeze the transferred table during training");

    EvalOpts ev;
    auto* sub_eval =
        app.add_subcommand("eval", "run the scenario evaluation protocol");
    sub_eval->add_option("--corpus", ev.corpus, "corpus JSONL")->required();
    sub_eval->add_option("--scenario", ev.scenario,
                         "orig_orig|gen_gen|orig_gen|gen_orig|mixture|all")
        ->capture_default_str();
    sub_eval->add_option("--models", ev.models_list, "comma-separated kinds")
        ->capture_default_str();
    sub_eval->add_option("--folds", ev.folds, "cross-validation folds")
        ->capture_default_str();
    sub_eval->add_option("--vocab-cap", ev.vocab_cap, "vocabulary cap")
        ->capture_default_str();
    sub_eval->add_option("--embed-dim", ev.embed_dim, "embedding width (0=default)")
        ->capture_default_str();
    sub_eval->add_option("--hidden", ev.hidden, "hidden width (0=default)")
        ->capture_default_str();
    sub_eval->add_option("--epochs", ev.epochs, "student epochs")
        ->capture_default_str();
    sub_eval->add_option("--teacher-epochs", ev.teacher_epochs, "teacher epochs")
        ->capture_default_str();
    sub_eval->add_option("--distill-epochs", ev.distill_epochs,
                         "distillation epochs")
        ->capture_default_str();
    sub_eval->add_option("--warmup-epochs", ev.warmup_epochs,
                         "kd warm-up epochs")
        ->capture_default_str();

    BenchOpts be;
    auto* sub_bench =
        app.add_subcommand("bench", "accuracy-free latency/size benchmark");
    sub_bench->add_option("--models", be.models_list, "comma-separated kinds")
        ->capture_default_str();
    sub_bench->add_option("--batch-size", be.batch_size, "batch size")
        ->capture_default_str();
    sub_bench->add_option("--seq-len", be.seq_len, "sequence length")
        ->capture_default_str();
    sub_bench->add_option("--repeats", be.repeats, "timed batches")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub_bench->add_option("--train-batches", be.train_batches,
                          "batches in the timed training epoch")
        ->capture_default_str();
    sub_bench->add_option("--vocab-size", be.vocab_size, "embedding rows")
        ->capture_default_str();

    for (auto* sub : {sub_gen, sub_train, sub_distill, sub_eval, sub_bench})
        sub->fallthrough();

    // config pairs are spliced in as leading tokens; explicit flags come
    // later in the stream and must win
    for (auto* opt : app.get_options())
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    for (auto* sub : {sub_gen, sub_train, sub_distill, sub_eval, sub_bench})
        for (auto* opt : sub->get_options())
            opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::vector<std::string> raw_args(argv + 1, argv + argc);
    std::string config_command;
    std::vector<std::string> args;
    try {
        args = splice_config(raw_args, &config_command);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    // CLI11 consumes tokens in reverse
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sub_gen->parsed()) {
            if (!config_command.empty() && config_command != "gen-corpus")
                throw ParameterError("config was written by `" +
                                     config_command + "`, not gen-corpus");
            return cmd_gen_corpus(g, gen);
        }
        if (sub_train->parsed()) {
            if (!config_command.empty() && config_command != "train")
                throw ParameterError("config was written by `" +
                                     config_command + "`, not train");
            return cmd_train(g, tr);
        }
        if (sub_distill->parsed()) {
            if (!config_command.empty() && config_command != "distill")
                throw ParameterError("config was written by `" +
                                     config_command + "`, not distill");
            return cmd_distill(g, di);
        }
        if (sub_eval->parsed()) {
            if (!config_command.empty() && config_command != "eval")
                throw ParameterError("config was written by `" +
                                     config_command + "`, not eval");
            return cmd_eval(g, ev);
        }
        if (sub_bench->parsed()) return cmd_bench(g, be);
        std::cerr << "error: no command\n";
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
