#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = PHISHKIT_CLI_PATH;

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "phishkit_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string hashes_of(const fs::path& manifest) {
    std::string out;
    std::ifstream in(manifest);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("# hash", 0) == 0) out += line + "\n";
    return out;
}

} // namespace

TEST_CASE("gen-corpus writes the corpus and reruns bit-identically") {
    fs::path dir = work_dir();
    REQUIRE(run("gen-corpus --n 12 --seed 7 --out " + (dir / "g1").string()) == 0);
    CHECK(fs::exists(dir / "g1" / "corpus.jsonl"));
    CHECK(fs::exists(dir / "g1" / "summary.txt"));
    CHECK(fs::exists(dir / "g1" / "similarity.csv"));
    CHECK(fs::exists(dir / "g1" / "manifest.txt"));

    REQUIRE(run("gen-corpus --n 12 --seed 7 --out " + (dir / "g2").string()) == 0);
    CHECK(slurp(dir / "g1" / "corpus.jsonl") == slurp(dir / "g2" / "corpus.jsonl"));

    // replay from the manifest reproduces artifact hashes
    REQUIRE(run("gen-corpus --config " + (dir / "g1" / "manifest.txt").string() +
                " --out " + (dir / "g3").string()) == 0);
    CHECK(hashes_of(dir / "g1" / "manifest.txt") ==
          hashes_of(dir / "g3" / "manifest.txt"));
}

TEST_CASE("usage errors exit with code 2") {
    fs::path dir = work_dir();
    CHECK(run("gen-corpus --dedup-threshold 1.01 --out " +
              (dir / "bad1").string()) == 2);
    CHECK(run("eval --corpus " + (dir / "g1" / "corpus.jsonl").string() +
              " --scenario sideways --out " + (dir / "bad2").string()) == 2);
    CHECK(run("nonsense-command") == 2);
}

TEST_CASE("missing inputs exit with code 3") {
    fs::path dir = work_dir();
    CHECK(run("train --corpus " + (dir / "nope.jsonl").string() + " --out " +
              (dir / "bad3").string()) == 3);
    CHECK(run("distill --corpus " + (dir / "g1" / "corpus.jsonl").string() +
              " --teacher-ckpt " + (dir / "nope.ckpt").string() + " --vocab x" +
              " --out " + (dir / "bad4").string()) == 3);
}

TEST_CASE("train then distill, with manifest replay of the checkpoint") {
    fs::path dir = work_dir();
    const std::string corpus = (dir / "g1" / "corpus.jsonl").string();
    REQUIRE(run("train --corpus " + corpus +
                " --model tiny_teacher --epochs 2 --seed 5 --out " +
                (dir / "teach").string()) == 0);
    CHECK(fs::exists(dir / "teach" / "model.ckpt"));
    CHECK(fs::exists(dir / "teach" / "vocab.txt"));
    CHECK(fs::exists(dir / "teach" / "history.csv"));

    REQUIRE(run("train --config " + (dir / "teach" / "manifest.txt").string() +
                " --out " + (dir / "teach2").string()) == 0);
    CHECK(slurp(dir / "teach" / "model.ckpt") ==
          slurp(dir / "teach2" / "model.ckpt"));

    REQUIRE(run("distill --corpus " + corpus + " --teacher-ckpt " +
                (dir / "teach" / "model.ckpt").string() + " --vocab " +
                (dir / "teach" / "vocab.txt").string() +
                " --alpha 0.5 --tau 2.0 --warmup-epochs 1 --seed 5 --out " +
                (dir / "kd").string()) == 0);
    CHECK(fs::exists(dir / "kd" / "student.ckpt"));

    REQUIRE(run("distill --config " + (dir / "kd" / "manifest.txt").string() +
                " --out " + (dir / "kd2").string()) == 0);
    CHECK(slurp(dir / "kd" / "student.ckpt") ==
          slurp(dir / "kd2" / "student.ckpt"));

    CHECK(run("distill --corpus " + corpus + " --teacher-ckpt " +
              (dir / "teach" / "model.ckpt").string() + " --vocab " +
              (dir / "teach" / "vocab.txt").string() + " --alpha 1.5 --out " +
              (dir / "kdbad").string()) == 2);
}

TEST_CASE("eval emits one block per scenario and replays bitwise") {
    fs::path dir = work_dir();
    const std::string corpus = (dir / "g1" / "corpus.jsonl").string();
    REQUIRE(run("eval --corpus " + corpus +
                " --scenario all --models lstm --epochs 1 --hidden 8 "
                "--embed-dim 8 --seed 3 --out " +
                (dir / "ev").string()) == 0);
    std::ifstream in(dir / "ev" / "metrics.csv");
    std::string line;
    std::getline(in, line); // header
    std::size_t rows = 0;
    std::set<std::string> scenarios;
    while (std::getline(in, line)) {
        ++rows;
        scenarios.insert(line.substr(line.find(',') + 1,
                                     line.find(',', line.find(',') + 1) -
                                         line.find(',') - 1));
    }
    CHECK(rows == 5 * 6); // 5 scenarios x (5 folds + mean)
    CHECK(scenarios.size() == 5);

    REQUIRE(run("eval --config " + (dir / "ev" / "manifest.txt").string() +
                " --out " + (dir / "ev2").string()) == 0);
    CHECK(slurp(dir / "ev" / "metrics.csv") == slurp(dir / "ev2" / "metrics.csv"));
}

TEST_CASE("bench emits one row per model") {
    fs::path dir = work_dir();
    REQUIRE(run("bench --models bilstm,tiny_teacher --batch-size 4 --seq-len 10 "
                "--repeats 3 --train-batches 1 --vocab-size 400 --out " +
                (dir / "bench").string()) == 0);
    std::ifstream in(dir / "bench" / "bench.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "model,params,train_s,test_s,p50_ms,p95_ms,mode");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2);
}
