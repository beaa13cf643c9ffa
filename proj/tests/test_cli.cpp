#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_env.hpp"

namespace fs = std::filesystem;

namespace {

std::string binPath() {
    REQUIRE(g_test_args.size() >= 2);
    return g_test_args[0];
}
std::string dataDir() { return g_test_args[1]; }

int run(const std::string& args, const std::string& log = "cli_out.txt") {
    std::string cmd = binPath() + " " + args + " > " + log + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& sub) const { return (dir / sub).string(); }
};

}  // namespace

TEST_CASE("missing input file exits 2 and names the path") {
    Scratch s("cli_missing");
    int rc = run("ingest --input /no/such/annotations.txt --out " + (s / "out"), s / "log.txt");
    CHECK(rc == 2);
    CHECK(slurp(s / "log.txt").find("/no/such/annotations.txt") != std::string::npos);
}

TEST_CASE("unknown arguments fail fast") {
    Scratch s("cli_badargs");
    CHECK(run("frobnicate", s / "log.txt") != 0);
}

TEST_CASE("grad-check subcommand validates the small network") {
    Scratch s("cli_gradcheck");
    int rc = run("grad-check --hidden 8,8 --tolerance 1e-4", s / "log.txt");
    CHECK(rc == 0);
    CHECK(slurp(s / "log.txt").find("ok") != std::string::npos);
}

TEST_CASE("full pipeline on the mini fixture is deterministic") {
    Scratch s("cli_pipeline");
    std::string fixture = dataDir() + "/mini_fixture.txt";

    // ingest
    REQUIRE(run("ingest --input " + fixture + " --stride 10 --scene mini --out " + (s / "ing"),
                s / "ingest_log.txt") == 0);
    std::string ing_log = slurp(s / "ingest_log.txt");
    CHECK(ing_log.find("3 trajectories") != std::string::npos);
    CHECK(ing_log.find("18 sequences") != std::string::npos);  // 3 x (25 - 19)
    CHECK(fs::exists(s / "ing/windows.jsonl"));
    CHECK(fs::exists(s / "ing/manifest.json"));

    // augment
    REQUIRE(run("augment --windows " + (s / "ing/windows.jsonl") +
                    " --fractions 0.05 --m 2 --seed 3 --out " + (s / "aug"),
                s / "augment_log.txt") == 0);
    CHECK(fs::exists(s / "aug/train.jsonl"));
    CHECK(fs::exists(s / "aug/test.jsonl"));

    // train twice with the same seed -> identical loss history
    std::string train_args = "train --data " + (s / "aug") +
                             " --members 2 --epochs 3 --batch 8 --hidden 8,8 --seed 7 --out ";
    REQUIRE(run(train_args + (s / "m1"), s / "train1_log.txt") == 0);
    REQUIRE(run(train_args + (s / "m2"), s / "train2_log.txt") == 0);
    CHECK(fs::exists(s / "m1/loss_history.csv"));
    CHECK(slurp(s / "m1/loss_history.csv") == slurp(s / "m2/loss_history.csv"));
    CHECK(slurp(s / "m1/member_0.json") == slurp(s / "m2/member_0.json"));

    // evaluate twice -> byte-identical CSVs
    std::string eval_args =
        "evaluate --model " + (s / "m1") + " --data " + (s / "aug") + " --seed 7 --out ";
    REQUIRE(run(eval_args + (s / "e1"), s / "eval1_log.txt") == 0);
    REQUIRE(run(eval_args + (s / "e2"), s / "eval2_log.txt") == 0);
    CHECK(fs::exists(s / "e1/metrics.csv"));
    CHECK(fs::exists(s / "e1/metrics.json"));
    CHECK(slurp(s / "e1/metrics.csv") == slurp(s / "e2/metrics.csv"));
    std::string metrics = slurp(s / "e1/metrics.csv");
    CHECK(metrics.find("prediction-only") != std::string::npos);
    CHECK(metrics.find("total-exact") != std::string::npos);
    CHECK(metrics.find("total-outer") != std::string::npos);

    // MC-dropout evaluation path needs a dropout-trained model
    REQUIRE(run("train --data " + (s / "aug") +
                    " --members 1 --epochs 3 --batch 8 --hidden 8,8 --dropout-p 0.5 --seed 7 "
                    "--out " + (s / "md"),
                s / "traind_log.txt") == 0);
    REQUIRE(run("evaluate --model " + (s / "md") + " --data " + (s / "aug") +
                    " --mc --dropout-b 5 --seed 7 --out " + (s / "emc"),
                s / "evalmc_log.txt") == 0);
    CHECK(fs::exists(s / "emc/metrics.csv"));
    // --mc without dropout in the checkpoint is an artifact error
    CHECK(run("evaluate --model " + (s / "m1") + " --data " + (s / "aug") +
                  " --mc --dropout-b 5 --out " + (s / "emcbad"),
              s / "evalmcbad_log.txt") == 4);

    // ood-predict over the bundled scenario file
    REQUIRE(run("ood-predict --model " + (s / "m1") + " --input " + dataDir() +
                    "/ood_scenarios.txt --stride 10 --out " + (s / "ood"),
                s / "ood_log.txt") == 0);
    CHECK(fs::exists(s / "ood/ood_0000.csv"));
    CHECK(fs::exists(s / "ood/manifest.json"));

    // a trajectory with only 8 observed steps still yields a 12-step forecast
    {
        std::ofstream eight(s / "eight.txt");
        for (int k = 0; k < 8; ++k)
            eight << k * 10 << "\t1\t" << 0.5 * k << "\t" << 0.1 * k << "\n";
    }
    REQUIRE(run("ood-predict --model " + (s / "m1") + " --input " + (s / "eight.txt") +
                    " --stride 10 --out " + (s / "ood8"),
                s / "ood8_log.txt") == 0);
    std::string dump = slurp(s / "ood8/ood_0000.csv");
    // header + 12 forecast rows
    CHECK(std::count(dump.begin(), dump.end(), '\n') == 13);

    // too-short trajectory exits 2
    {
        std::ofstream shorty(s / "short.txt");
        for (int k = 0; k < 5; ++k) shorty << k * 10 << "\t1\t" << 0.5 * k << "\t0\n";
    }
    CHECK(run("ood-predict --model " + (s / "m1") + " --input " + (s / "short.txt") +
                  " --stride 10 --out " + (s / "oodshort"),
              s / "oodshort_log.txt") == 2);

    // evaluate with a missing model directory exits 4
    CHECK(run("evaluate --model " + (s / "nomodel") + " --data " + (s / "aug") + " --out " +
                  (s / "e4"),
              s / "eval4_log.txt") == 4);
}

TEST_CASE("epochs 0 leaves the checkpoint at its initialization") {
    Scratch s("cli_epoch0");
    std::string fixture = dataDir() + "/mini_fixture.txt";
    REQUIRE(run("ingest --input " + fixture + " --stride 10 --out " + (s / "ing"),
                s / "l1.txt") == 0);
    REQUIRE(run("augment --windows " + (s / "ing/windows.jsonl") +
                    " --fractions 0.05 --m 1 --seed 3 --out " + (s / "aug"),
                s / "l2.txt") == 0);
    std::string base = "train --data " + (s / "aug") + " --members 1 --hidden 8,8 --seed 9 ";
    REQUIRE(run(base + "--epochs 0 --out " + (s / "t0"), s / "l3.txt") == 0);
    REQUIRE(run(base + "--epochs 2 --out " + (s / "t2"), s / "l4.txt") == 0);
    CHECK(slurp(s / "t0/member_0.json") != slurp(s / "t2/member_0.json"));
    // same init seed, no steps -> rerun is identical
    REQUIRE(run(base + "--epochs 0 --out " + (s / "t0b"), s / "l5.txt") == 0);
    CHECK(slurp(s / "t0/member_0.json") == slurp(s / "t0b/member_0.json"));
}

TEST_CASE("manifests record the command and input hashes") {
    Scratch s("cli_manifest");
    std::string fixture = dataDir() + "/mini_fixture.txt";
    REQUIRE(run("ingest --input " + fixture + " --stride 10 --seed 5 --out " + (s / "ing"),
                s / "l1.txt") == 0);
    std::string manifest = slurp(s / "ing/manifest.json");
    CHECK(manifest.find("\"command\"") != std::string::npos);
    CHECK(manifest.find("\"seed\"") != std::string::npos);
    CHECK(manifest.find("mini_fixture.txt") != std::string::npos);
}
