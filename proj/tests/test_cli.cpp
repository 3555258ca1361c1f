#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "helpers.hpp"

// End-to-end tests against the installed binary; skipped unless the build
// exports MIXTOPIC_CLI_PATH (the CMake target does).

namespace {

struct RunResult {
    int code = -1;
    std::string output;  // stdout and stderr interleaved
};

const std::string& cli_path() {
    static const std::string path = [] {
        if (const char* env = std::getenv("MIXTOPIC_CLI_PATH_OVERRIDE")) return std::string(env);
#ifdef MIXTOPIC_CLI_PATH
        return std::string(MIXTOPIC_CLI_PATH);
#else
        return std::string();
#endif
    }();
    REQUIRE_FALSE(path.empty());
    return path;
}

RunResult run_cli(const std::string& args) {
    RunResult r;
    const std::string cmd = cli_path() + " " + args + " 2>&1";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    REQUIRE(pipe);
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe.get())) > 0) r.output.append(buf, got);
    const int status = pclose(pipe.release());
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(testutil::slurp(path)); }

// one shared generated fixture both for speed and determinism checks
const std::string& fixture_dir() {
    static testutil::TempDir tmp;
    static const std::string dir = [] {
        const std::string out = tmp.join("gen");
        RunResult r = run_cli("generate --fixture two-clusters-strong --seed 7 --out " + out);
        REQUIRE(r.code == 0);
        return out;
    }();
    return dir;
}

// small LINQS corpus: 12 documents in two word-disjoint halves, 14 distinct
// linked pairs so the 10-fold splitter has material to work with
const std::string& linqs_dir() {
    static testutil::TempDir tmp;
    static const std::string dir = [] {
        std::string content, cites;
        for (int d = 0; d < 12; ++d) {
            const bool left = d < 6;
            content += "n" + std::to_string(d) + "\t";
            content += left ? "3\t1\t0\t0" : "0\t0\t2\t2";
            content += left ? "\tL\n" : "\tR\n";
        }
        auto edge = [&](int a, int b) {
            cites += "n" + std::to_string(a) + "\tn" + std::to_string(b) + "\n";
        };
        for (int i = 0; i < 6; ++i) edge(i, (i + 1) % 6);            // 6-cycle on the left
        for (int i = 6; i < 12; ++i) edge(i, i == 11 ? 6 : i + 1);   // 6-cycle on the right
        edge(0, 6);
        edge(3, 9);
        tmp.file("toy.content", content);
        tmp.file("toy.cites", cites);
        return tmp.path.string();
    }();
    return dir;
}

}  // namespace

TEST_CASE("version and help exit cleanly") {
    REQUIRE_FALSE(cli_path().empty());
    RunResult v = run_cli("--version");
    REQUIRE(v.code == 0);
    REQUIRE(v.output.find("mixtopic") != std::string::npos);
    REQUIRE(run_cli("--help").code == 0);
    REQUIRE(run_cli("fit --help").code == 0);
}

TEST_CASE("a missing subcommand or bad flags exit with usage errors") {
    REQUIRE(run_cli("").code == 2);
    REQUIRE(run_cli("no-such-command").code == 2);
    REQUIRE(run_cli("fit --corpus x.json --out y").code == 2);  // --topics is required
}

TEST_CASE("generate writes a reproducible corpus with sidecars") {
    const std::string dir = fixture_dir();
    for (const char* name : {"corpus.json", "truth.json", "truth_labels.tsv", "manifest.json"})
        REQUIRE(std::filesystem::exists(std::filesystem::path(dir) / name));

    testutil::TempDir tmp;
    const std::string again = tmp.join("gen2");
    REQUIRE(run_cli("generate --fixture two-clusters-strong --seed 7 --out " + again).code == 0);
    REQUIRE(testutil::slurp(dir + "/corpus.json") == testutil::slurp(again + "/corpus.json"));
    REQUIRE(testutil::slurp(dir + "/truth.json") == testutil::slurp(again + "/truth.json"));

    RunResult bad = run_cli("generate --fixture no-such --out " + tmp.join("x"));
    REQUIRE(bad.code == 2);
    REQUIRE(bad.output.find("unknown fixture") != std::string::npos);
}

TEST_CASE("fit recovers the planted clusters and reports them") {
    testutil::TempDir tmp;
    const std::string fit_dir = tmp.join("fit");
    RunResult fit = run_cli("fit --corpus " + fixture_dir() + "/corpus.json --topics 2 --alpha 0.5 " +
                            "--restarts 2 --seed 5 --out " + fit_dir);
    REQUIRE(fit.code == 0);
    for (const char* name : {"model.json", "labels.tsv", "fit_report.json", "restarts.tsv", "manifest.json"})
        REQUIRE(std::filesystem::exists(std::filesystem::path(fit_dir) / name));

    const nlohmann::json report = read_json(fit_dir + "/fit_report.json");
    REQUIRE(report["converged"].get<bool>());
    REQUIRE(report["objective_trace"].size() >= 2);

    RunResult ev = run_cli("eval --labels " + fit_dir + "/labels.tsv --truth " + fixture_dir() +
                           "/truth_labels.tsv");
    REQUIRE(ev.code == 0);
    const nlohmann::json metrics = nlohmann::json::parse(ev.output);
    REQUIRE(metrics["nmi"].get<double>() >= 0.95);
}

TEST_CASE("a zero iteration budget reports an unconverged fit") {
    testutil::TempDir tmp;
    const std::string dir = tmp.join("fit0");
    RunResult fit = run_cli("fit --corpus " + fixture_dir() + "/corpus.json --topics 2 --max-iters 0 --out " + dir);
    REQUIRE(fit.code == 0);
    REQUIRE(read_json(dir + "/fit_report.json")["converged"].get<bool>() == false);
}

TEST_CASE("hyperparameter validation surfaces as exit code 2") {
    testutil::TempDir tmp;
    const std::string corpus = fixture_dir() + "/corpus.json";
    REQUIRE(run_cli("fit --corpus " + corpus + " --topics 2 --alpha 1.5 --out " + tmp.join("a")).code == 2);
    REQUIRE(run_cli("fit --corpus " + corpus + " --topics 2 --gamma 0.5,1 --out " + tmp.join("b")).code == 2);
    REQUIRE(run_cli("fit --corpus " + corpus + " --topics 2 --length-normalize bogus --out " + tmp.join("c")).code == 2);
    // canonical and LINQS inputs are mutually exclusive
    REQUIRE(run_cli("fit --corpus " + corpus + " --content x.content --topics 2 --out " + tmp.join("d")).code == 2);
    REQUIRE(run_cli("fit --topics 2 --out " + tmp.join("e")).code == 2);  // no input at all
}

TEST_CASE("existing output directories need --force") {
    testutil::TempDir tmp;
    const std::string dir = tmp.join("occupied");
    std::filesystem::create_directories(dir);
    tmp.file("occupied/leftover.txt", "old run\n");

    const std::string args = "fit --corpus " + fixture_dir() + "/corpus.json --topics 2 --max-iters 1 --out " + dir;
    REQUIRE(run_cli(args).code == 2);
    REQUIRE(run_cli(args + " --force").code == 0);
}

TEST_CASE("LINQS inputs fit end to end with priors and refinement") {
    testutil::TempDir tmp;
    const std::string dir = tmp.join("fit");
    RunResult fit = run_cli("fit --content " + linqs_dir() + "/toy.content --cites " + linqs_dir() +
                            "/toy.cites --topics 2 --alpha 0.5 --gamma 1.5,1.5 --restarts 2 --seed 3 " +
                            "--kl-refine --refine-top 2 --out " + dir);
    REQUIRE(fit.code == 0);
    const nlohmann::json report = read_json(dir + "/fit_report.json");
    REQUIRE(report.contains("kl_refine"));
    REQUIRE(std::filesystem::exists(std::filesystem::path(dir) / "truth_labels.tsv"));

    // the two word-disjoint halves are trivially separable
    RunResult ev = run_cli("eval --labels " + dir + "/labels.tsv --truth " + dir + "/truth_labels.tsv");
    REQUIRE(ev.code == 0);
    REQUIRE(nlohmann::json::parse(ev.output)["nmi"].get<double>() == 1.0);
}

TEST_CASE("eval scores identical labelings perfectly") {
    RunResult ev = run_cli("eval --labels " + fixture_dir() + "/truth_labels.tsv --truth " + fixture_dir() +
                           "/truth_labels.tsv");
    REQUIRE(ev.code == 0);
    const nlohmann::json metrics = nlohmann::json::parse(ev.output);
    REQUIRE(metrics["nmi"].get<double>() == 1.0);
    REQUIRE(metrics["vi_nats"].get<double>() == 0.0);
    REQUIRE(metrics["vi_bits"].get<double>() == 0.0);
    REQUIRE(metrics["pwf"].get<double>() == 1.0);
}

TEST_CASE("eval names documents missing from either side") {
    testutil::TempDir tmp;
    const std::string pred = tmp.file("pred.tsv", "d0\t0\nd1\t1\n");
    const std::string truth = tmp.file("truth.tsv", "d0\t0\nd1\t1\nd2\t0\n");
    RunResult ev = run_cli("eval --labels " + pred + " --truth " + truth);
    REQUIRE(ev.code == 2);
    REQUIRE(ev.output.find("d2") != std::string::npos);

    const std::string mangled = tmp.file("mangled.tsv", "d0\t0\nd0\t1\n");
    REQUIRE(run_cli("eval --labels " + mangled + " --truth " + truth).code == 2);
}

TEST_CASE("link prediction records its protocol and reproduces bit for bit") {
    testutil::TempDir tmp;
    const std::string base = "predict-links --content " + linqs_dir() + "/toy.content --cites " +
                             linqs_dir() + "/toy.cites --topics 2 --alpha 0.5 --neg-rate 0.5 --seed 9 ";
    RunResult a = run_cli(base + "--out " + tmp.join("a"));
    REQUIRE(a.code == 0);
    const nlohmann::json report = read_json(tmp.join("a") + "/link_prediction.json");
    REQUIRE(report["negative_sample_rate"].get<double>() == 0.5);
    REQUIRE(report["fold_auc"].size() == 10);

    const std::string roc = testutil::slurp(tmp.join("a") + "/roc.csv");
    REQUIRE(roc.rfind("x,y\n", 0) == 0);
    REQUIRE(std::filesystem::exists(std::filesystem::path(tmp.join("a")) / "pr.csv"));

    RunResult b = run_cli(base + "--out " + tmp.join("b"));
    REQUIRE(b.code == 0);
    REQUIRE(testutil::slurp(tmp.join("a") + "/link_prediction.json") ==
            testutil::slurp(tmp.join("b") + "/link_prediction.json"));
}

TEST_CASE("link prediction clears the planted-cluster bar") {
    testutil::TempDir tmp;
    RunResult r = run_cli("predict-links --corpus " + fixture_dir() + "/corpus.json --topics 2 " +
                          "--alpha 0.5 --restarts 2 --seed 5 --out " + tmp.join("pl"));
    REQUIRE(r.code == 0);
    const nlohmann::json report = read_json(tmp.join("pl") + "/link_prediction.json");
    REQUIRE(report["mean_auc"].get<double>() >= 0.85);
}

TEST_CASE("bench emits one csv row per ladder size") {
    testutil::TempDir tmp;
    RunResult r = run_cli("bench --docs 60,120 --topics 2 --words 40 --length 12 --degree 4 --iters 2 "
                          "--seed 3 --out " +
                          tmp.join("bench"));
    REQUIRE(r.code == 0);
    REQUIRE(r.output.find("N=60") != std::string::npos);
    REQUIRE(r.output.find("N=120") != std::string::npos);

    const std::string csv = testutil::slurp(tmp.join("bench") + "/bench.csv");
    REQUIRE(csv.rfind("N,M,R,K,seconds_per_iteration\n", 0) == 0);
    REQUIRE(csv.find("\n60,") != std::string::npos);
    REQUIRE(csv.find("\n120,") != std::string::npos);
    REQUIRE(run_cli("bench --docs 60 --iters 0").code == 2);
}
