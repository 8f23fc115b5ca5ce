#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(SGM_CLI) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

struct Workdir {
    fs::path dir;
    Workdir() {
        dir = fs::temp_directory_path() / ("sgm_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Workdir() { fs::remove_all(dir); }
    std::string file(const std::string& name, const std::string& content) const {
        const fs::path p = dir / name;
        std::ofstream(p) << content;
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("train, predict, rank and eval on the toy corpus") {
    Workdir w;
    const std::string train = w.file("train.txt", "1 0:2\n2 1:2\n");
    const std::string test = w.file("test.txt", "1 0:1\n2 1:1\n");
    const std::string cfg = w.file("toy.cfg", "smooth.discount=jm\nsmooth.beta=0.9\nsmooth.mu=0\nsmooth.background=uniform\n");

    Run r = run("train --train " + train + " --config " + cfg + " --smooth.beta 0.5 --index-out " + w.path("toy.idx") +
                " --model-out " + w.path("toy.model"));
    REQUIRE(r.status == 0);
    CHECK(r.out.find("postings=2") != std::string::npos);

    r = run("predict --index " + w.path("toy.idx") + " --test " + test + " --out " + w.path("pred.txt"));
    REQUIRE(r.status == 0);
    const std::string pred = slurp(w.path("pred.txt"));
    CHECK(pred.rfind("0 1 ", 0) == 0);
    // ln 0.375 under beta = 0.5, which the flag set over the config file's 0.9
    CHECK(pred.find("-0.980829253011") != std::string::npos);

    r = run("eval --pred " + w.path("pred.txt") + " --ref " + test);
    REQUIRE(r.status == 0);
    CHECK(r.out.find("micro_f1=1") != std::string::npos);

    r = run("rank --index " + w.path("toy.idx") + " --test " + test + " -k 5 --out " + w.path("rank.txt"));
    REQUIRE(r.status == 0);
    const std::string ranking = slurp(w.path("rank.txt"));
    CHECK(std::count(ranking.begin(), ranking.end(), '\n') == 4);

    // rankings list powerset class ids: label 1 is class 0, label 2 is class 1
    const std::string judg = w.file("judg.txt", "0 0 1\n1 1 1\n");
    r = run("eval --ranking " + w.path("rank.txt") + " --judgments " + judg);
    REQUIRE(r.status == 0);
    CHECK(r.out.find("map=1") != std::string::npos);
    CHECK(r.out.find("ndcg@20=1") != std::string::npos);

    r = run("index dump --index " + w.path("toy.idx"));
    REQUIRE(r.status == 0);
    CHECK(r.out.find("postings=2") != std::string::npos);

    r = run("predict --scorer bm25 --train " + train + " --test " + test);
    REQUIRE(r.status == 0);
    CHECK(r.out.rfind("0 1 ", 0) == 0);
    r = run("rank --scorer vsm --train " + train + " --test " + test + " -k 1");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("\n1 1 2 ") != std::string::npos);
}

TEST_CASE("error paths") {
    Workdir w;
    Run r = run("train --train " + w.path("missing.txt"));
    CHECK(r.status != 0);
    CHECK(r.out.find("missing.txt") != std::string::npos);

    const std::string bad = w.file("bad.txt", "1 0:1\n1\n");
    r = run("train --train " + bad + " --model.kind tdm");
    CHECK(r.status != 0);
    CHECK(r.out.find("empty") != std::string::npos);

    const std::string test = w.file("test.txt", "0:1\n");
    r = run("predict --scorer svm --index x --test " + test);
    CHECK(r.status != 0);
    r = run("predict --scorer vsm --index x --test " + test);
    CHECK(r.status != 0);
}

TEST_CASE("t-test report over per-dataset scores") {
    Workdir w;
    const std::string a = w.file("a.txt", "r8 3\nwebkb 4\nohsu 5\n");
    const std::string b = w.file("b.txt", "r8 2\nwebkb 2\nohsu 2\n");
    const Run r = run("eval --scores-a " + a + " --scores-b " + b);
    REQUIRE(r.status == 0);
    CHECK(r.out.find("flag=‡") != std::string::npos);
    CHECK(r.out.find("p=0.03708995") != std::string::npos);
}

TEST_CASE("search and split") {
    Workdir w;
    std::string train, dev;
    for (int i = 0; i < 12; ++i) {
        train += std::to_string(i % 2) + " " + std::to_string(i % 2) + ":2 2:1\n";
        dev += std::to_string(i % 2) + " " + std::to_string(i % 2) + ":1\n";
    }
    const std::string tr = w.file("tr.txt", train);
    const std::string dv = w.file("dev.txt", dev);
    const std::string common = "search --train " + tr + " --dev " + dv +
                               " --param smooth.beta:0.05:0.95 --smooth.discount jm --smooth.mu 0 --iterations 4"
                               " --subiterations 3 --seed 9 --trace ";
    Run r = run(common + w.path("t1.txt") + " --best-out " + w.path("best.cfg"));
    REQUIRE(r.status == 0);
    CHECK(r.out.find("evaluations=12") != std::string::npos);
    CHECK(r.out.find("best_value=1") != std::string::npos);
    const std::string t1 = slurp(w.path("t1.txt"));
    CHECK(std::count(t1.begin(), t1.end(), '\n') == 12);
    CHECK(slurp(w.path("best.cfg")).find("smooth.beta=") != std::string::npos);
    r = run(common + w.path("t2.txt"));
    REQUIRE(r.status == 0);
    CHECK(slurp(w.path("t2.txt")) == t1);

    r = run("split --input " + tr + " --train-out " + w.path("a.txt") + " --test-out " + w.path("b.txt") +
            " --fraction 0.25 --seed 4");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("train=9 test=3") != std::string::npos);
}
