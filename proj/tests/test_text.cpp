#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "phishkit/error.hpp"
#include "phishkit/text/normalize.hpp"
#include "phishkit/text/tokenize.hpp"
#include "phishkit/text/vocab.hpp"
#include "phishkit/text/word2vec.hpp"

using namespace phishkit;
using namespace phishkit::text;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("normalize_email strips html, lowercases, collapses whitespace") {
    CHECK(normalize_email("<b>Urgent!</b>  Verify NOW", TokenMode::WordPiece) ==
          "urgent! verify now");
    CHECK(normalize_email("", TokenMode::WordPiece) == "");
    CHECK(normalize_email("", TokenMode::Word) == "");
    CHECK(normalize_email("a &amp; b", TokenMode::WordPiece) == "a & b");
}

TEST_CASE("normalize_email word mode removes digits and stopwords") {
    CHECK(normalize_email("Call 555-1234", TokenMode::Word) == "call");
    CHECK(normalize_email("The account is suspended", TokenMode::Word) ==
          "account suspended");
    // digits survive in wordpiece mode
    CHECK(normalize_email("Call 555-1234", TokenMode::WordPiece) ==
          "call 555-1234");
}

TEST_CASE("build_vocab frequency order and reserved ids") {
    Vocab v = build_vocab({"a b", "a"}, 10, 1);
    CHECK(v.id_of("a") == 4);
    CHECK(v.id_of("b") == 5);
    CHECK(v.size() == 6);
    CHECK(v.token_of(0) == "[PAD]");
    CHECK(v.token_of(3) == "[SEP]");
}

TEST_CASE("build_vocab degenerate cap maps everything to UNK") {
    Vocab v = build_vocab({"a b c"}, 4, 1);
    CHECK(v.size() == 4);
    CHECK(v.id_of("a") == Vocab::kUnk);
    CHECK(v.id_of("b") == Vocab::kUnk);
}

TEST_CASE("build_vocab tie broken lexicographically") {
    Vocab v = build_vocab({"y x", "x y"}, 10, 1);
    CHECK(v.id_of("x") == 4);
    CHECK(v.id_of("y") == 5);
}

TEST_CASE("build_vocab min_freq filter") {
    Vocab v = build_vocab({"a a b"}, 10, 2);
    CHECK(v.contains("a"));
    CHECK_FALSE(v.contains("b"));
}

TEST_CASE("vocab save/load round trip") {
    Vocab v = build_vocab({"gamma alpha beta gamma beta gamma"}, 10, 1);
    const std::string path = tmp_path("phishkit_vocab_test.txt");
    v.save(path);
    Vocab w = Vocab::load(path);
    CHECK(w.size() == v.size());
    for (std::size_t id = 0; id < v.size(); ++id)
        CHECK(w.token_of(id) == v.token_of(id));
    std::remove(path.c_str());
}

TEST_CASE("tokenize_word basics") {
    Vocab v = build_vocab({"verify account"}, 10, 1);
    auto seq = tokenize_word("verify account", v);
    CHECK(seq.ids == std::vector<std::size_t>{v.id_of("verify"), v.id_of("account")});
    CHECK_FALSE(seq.truncated);

    auto unk = tokenize_word("zzzqx", v);
    CHECK(unk.ids == std::vector<std::size_t>{Vocab::kUnk});
}

TEST_CASE("tokenize_word truncation at the cap") {
    Vocab v = build_vocab({"tok"}, 10, 1);
    std::string text;
    for (int i = 0; i < 600; ++i) text += "tok ";
    auto seq = tokenize_word(text, v);
    CHECK(seq.ids.size() == 512);
    CHECK(seq.truncated);
}

TEST_CASE("tokenize_wordpiece greedy longest match") {
    Vocab v = Vocab::from_counts(
        {{"un", 5}, {"##happi", 4}, {"##ness", 3}}, 100, 1);
    auto seq = tokenize_wordpiece("unhappiness", v);
    std::vector<std::size_t> want = {Vocab::kCls, v.id_of("un"),
                                     v.id_of("##happi"), v.id_of("##ness"),
                                     Vocab::kSep};
    CHECK(seq.ids == want);
}

TEST_CASE("tokenize_wordpiece empty and UNK word") {
    Vocab v = Vocab::from_counts({{"hello", 1}}, 100, 1);
    auto empty = tokenize_wordpiece("", v);
    CHECK(empty.ids == std::vector<std::size_t>{Vocab::kCls, Vocab::kSep});
    auto unk = tokenize_wordpiece("zzz", v);
    CHECK(unk.ids == std::vector<std::size_t>{Vocab::kCls, Vocab::kUnk, Vocab::kSep});
}

TEST_CASE("tokenize_wordpiece always wrapped and capped") {
    std::vector<std::string> corpus = {"alpha beta gamma delta epsilon"};
    Vocab v = build_wordpiece_vocab(corpus, 200, 1);
    std::string text;
    for (int i = 0; i < 700; ++i) text += "alpha ";
    auto seq = tokenize_wordpiece(text, v);
    CHECK(seq.ids.size() == 512);
    CHECK(seq.ids.front() == Vocab::kCls);
    CHECK(seq.ids.back() == Vocab::kSep);
    CHECK(seq.truncated);
}

TEST_CASE("wordpiece vocab decomposes unseen words via characters") {
    Vocab v = build_wordpiece_vocab({"urgent action required today"}, 500, 1);
    // "urgentt" is unseen but decomposes as urgent + ##t
    auto seq = tokenize_wordpiece("urgentt", v);
    REQUIRE(seq.ids.size() == 4);
    CHECK(v.token_of(seq.ids[1]) == "urgent");
    CHECK(v.token_of(seq.ids[2]) == "##t");
}

TEST_CASE("word-level round trip reproduces normalized token stream") {
    std::string raw = "Security Update: verify settings before Friday";
    std::string norm = normalize_email(raw, TokenMode::Word);
    Vocab v = build_vocab({norm}, 100, 1);
    auto seq = tokenize_word(norm, v);
    std::string rebuilt;
    for (std::size_t id : seq.ids) {
        if (!rebuilt.empty()) rebuilt += " ";
        rebuilt += v.token_of(id);
    }
    CHECK(rebuilt == norm);
}

namespace {

// Corpus where (A,B) always co-occur around glue token E, and (C,D) around
// F, so cluster members share context distributions.
std::vector<TokenSequence> cooccurrence_corpus(std::size_t docs) {
    std::vector<TokenSequence> corpus;
    for (std::size_t i = 0; i < docs; ++i) {
        corpus.push_back({{4, 5, 8}, false}); // A B E
        corpus.push_back({{5, 4, 8}, false}); // B A E
        corpus.push_back({{6, 7, 9}, false}); // C D F
        corpus.push_back({{7, 6, 9}, false}); // D C F
    }
    return corpus;
}

std::vector<double> table_row(const EmbeddingTable& t, std::size_t r) {
    return std::vector<double>(t.row(r), t.row(r) + t.dim);
}

} // namespace

TEST_CASE("word2vec separates co-occurrence clusters") {
    Word2VecConfig cfg;
    cfg.dim = 16;
    cfg.window = 2;
    cfg.negatives = 3;
    cfg.epochs = 3;
    cfg.seed = 5;
    auto corpus = cooccurrence_corpus(160);
    auto result = train_embeddings(corpus, 10, cfg);
    const auto& t = result.table;
    CHECK(t.rows() == 10);
    CHECK(t.dim == 16);
    double ab = cosine(table_row(t, 4), table_row(t, 5));
    double ac = cosine(table_row(t, 4), table_row(t, 6));
    CHECK(ab > ac);

    SUBCASE("per-epoch loss decreases monotonically") {
        for (std::size_t e = 1; e < result.epoch_loss.size(); ++e)
            CHECK(result.epoch_loss[e] < result.epoch_loss[e - 1]);
    }

    SUBCASE("cbow mode also separates the clusters") {
        cfg.mode = Word2VecConfig::Mode::Cbow;
        auto r2 = train_embeddings(corpus, 10, cfg);
        double ab2 = cosine(table_row(r2.table, 4), table_row(r2.table, 5));
        double ac2 = cosine(table_row(r2.table, 4), table_row(r2.table, 6));
        CHECK(ab2 > ac2);
    }
}

TEST_CASE("word2vec default dimension is 100 and PAD row stays zero") {
    Word2VecConfig cfg;
    cfg.epochs = 1;
    auto corpus = cooccurrence_corpus(2);
    auto result = train_embeddings(corpus, 10, cfg);
    CHECK(result.table.dim == 100);
    CHECK(result.table.rows() == 10);
    for (std::size_t c = 0; c < result.table.dim; ++c)
        CHECK(result.table.row(Vocab::kPad)[c] == 0.0);
}

TEST_CASE("word2vec determinism under a fixed seed") {
    Word2VecConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 2;
    cfg.seed = 99;
    auto corpus = cooccurrence_corpus(10);
    auto a = train_embeddings(corpus, 10, cfg);
    auto b = train_embeddings(corpus, 10, cfg);
    CHECK(a.table.data == b.table.data);
}

TEST_CASE("word2vec rejects vocab smaller than negatives+1") {
    Word2VecConfig cfg;
    cfg.negatives = 10;
    auto corpus = cooccurrence_corpus(1);
    CHECK_THROWS_AS(train_embeddings(corpus, 10, cfg), ParameterError);
}

TEST_CASE("email_vector_mean basics") {
    EmbeddingTable t;
    t.dim = 2;
    t.data = {0, 0, 1, 2, 3, 4}; // PAD, id1, id2
    TokenSequence one{{1}, false};
    auto v1 = email_vector_mean(one, t);
    CHECK(v1 == std::vector<double>{1, 2});

    TokenSequence two{{1, 2}, false};
    auto v2 = email_vector_mean(two, t);
    CHECK(v2 == std::vector<double>{2, 3});

    TokenSequence swapped{{2, 1}, false};
    CHECK(email_vector_mean(swapped, t) == v2);

    bool all_pad = false;
    TokenSequence pads{{0, 0}, false};
    auto vz = email_vector_mean(pads, t, &all_pad);
    CHECK(all_pad);
    CHECK(vz == std::vector<double>{0, 0});
}

TEST_CASE("embedding table file round trip is exact") {
    Word2VecConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 1;
    cfg.seed = 3;
    auto result = train_embeddings(cooccurrence_corpus(4), 10, cfg);
    const std::string path = tmp_path("phishkit_embed_test.txt");
    result.table.save(path);
    EmbeddingTable loaded = EmbeddingTable::load(path);
    CHECK(loaded.dim == result.table.dim);
    CHECK(loaded.data == result.table.data);
    std::remove(path.c_str());
}
