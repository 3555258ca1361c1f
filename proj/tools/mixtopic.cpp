// mixtopic command line: fit mixed-topic link models over document networks,
// run the 10-fold link prediction protocol, score labelings, generate planted
// fixtures, and time the EM iteration over synthetic size ladders.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or input validation error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mixtopic/corpus.hpp"
#include "mixtopic/discrete.hpp"
#include "mixtopic/em.hpp"
#include "mixtopic/eval.hpp"
#include "mixtopic/generator.hpp"
#include "mixtopic/model.hpp"
#include "mixtopic/rng.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace mixtopic;

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// shared flag bundles
// ---------------------------------------------------------------------------

struct InputFlags {
    std::string corpus_path;
    std::string content_path;
    std::string cites_path;
    bool binarize = false;
};

struct FitFlags {
    std::size_t topics = 1;
    double alpha = 0.5;
    std::size_t restarts = 1;
    std::size_t max_iters = 5000;
    double tol = 1e-7;
    bool degree_corrected = false;
    std::vector<std::string> length_normalize;  // empty vector + count>0 means bare flag
    CLI::Option* length_normalize_opt = nullptr;
    std::vector<double> gamma;
    double theta_threshold = 0.0;
    std::uint64_t seed = 1;
    std::size_t jobs = 0;  // 0 = resolve from MIXTOPIC_JOBS or core count
    bool jobs_given = false;
    std::size_t dc_inner_sweeps = 5;
    bool deterministic = false;
};

struct OutFlags {
    std::string dir;
    bool force = false;
};

void add_input_flags(CLI::App* cmd, InputFlags& in) {
    cmd->add_option("--corpus", in.corpus_path, "canonical JSON corpus");
    cmd->add_option("--content", in.content_path, "LINQS content file (dense or sparse rows)");
    cmd->add_option("--cites", in.cites_path, "LINQS citation file");
    cmd->add_flag("--binarize", in.binarize, "clamp word counts to 0/1 and collapse repeated links");
}

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
    cmd->add_option("--topics", f.topics, "topic count K")->required();
    cmd->add_option("--alpha", f.alpha, "content weight in [0,1] (default 0.5)");
    cmd->add_option("--restarts", f.restarts, "independent EM restarts (default 1)");
    cmd->add_option("--max-iters", f.max_iters, "EM iteration cap (default 5000)");
    cmd->add_option("--tol", f.tol, "relative objective tolerance (default 1e-7)");
    cmd->add_flag("--degree-corrected", f.degree_corrected, "fit the degree-corrected variant");
    f.length_normalize_opt =
        cmd->add_option("--length-normalize", f.length_normalize,
                        "weight each document's content term by 1/L_d: on|off (bare flag means on; default on)")
            ->expected(0, 1);
    cmd->add_option("--gamma", f.gamma, "Dirichlet prior parameters g1,...,gK (each >= 1)")->delimiter(',');
    cmd->add_option("--theta-threshold", f.theta_threshold, "zero out mixture entries below this after each M-step");
    cmd->add_option("--seed", f.seed, "base seed; restart r uses fork(seed, r)");
    cmd->add_option("--jobs", f.jobs, "worker threads (default: MIXTOPIC_JOBS or core count)");
    cmd->add_option("--inner-sweeps", f.dc_inner_sweeps, "degree-corrected inner fixed-point sweeps (default 5)");
    cmd->add_flag("--deterministic", f.deterministic,
                  "recorded in the manifest; reductions are order-stable at any job count");
}

Corpus load_input(const InputFlags& in) {
    const bool canonical = !in.corpus_path.empty();
    const bool linqs = !in.content_path.empty() || !in.cites_path.empty();
    if (canonical && linqs) throw UsageError("give either --corpus or --content/--cites, not both");
    if (canonical) {
        Corpus c = load_canonical(in.corpus_path);
        if (in.binarize) {
            binarize_counts(c);
            std::vector<Edge> edges = c.links.edges;
            for (Edge& e : edges) e.count = 1;
            c.links = make_link_graph(c.n_docs(), std::move(edges));
        }
        return c;
    }
    if (in.content_path.empty() || in.cites_path.empty())
        throw UsageError("need --corpus, or both --content and --cites");
    return load_linqs(in.content_path, in.cites_path, in.binarize);
}

HyperConfig make_config(const FitFlags& f) {
    HyperConfig c;
    c.topics = f.topics;
    c.alpha = f.alpha;
    c.degree_corrected = f.degree_corrected;
    if (f.length_normalize_opt && f.length_normalize_opt->count() > 0) {
        if (f.length_normalize.empty()) {
            c.length_normalize = true;
        } else if (f.length_normalize[0] == "on") {
            c.length_normalize = true;
        } else if (f.length_normalize[0] == "off") {
            c.length_normalize = false;
        } else {
            throw UsageError("--length-normalize takes 'on' or 'off'");
        }
    }
    c.gamma = f.gamma;
    c.theta_zero_threshold = f.theta_threshold;
    c.max_iters = f.max_iters;
    c.rel_tol = f.tol;
    c.seed = f.seed;
    c.validate();
    return c;
}

std::size_t resolve_jobs(const FitFlags& f) {
    if (f.jobs_given && f.jobs > 0) return f.jobs;
    if (const char* env = std::getenv("MIXTOPIC_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return std::size_t(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

FitOptions make_options(const FitFlags& f) {
    FitOptions o;
    o.restarts = f.restarts;
    o.jobs = resolve_jobs(f);
    o.dc_inner_sweeps = f.dc_inner_sweeps;
    return o;
}

// ---------------------------------------------------------------------------
// output plumbing
// ---------------------------------------------------------------------------

fs::path prepare_out(const OutFlags& out) {
    if (out.dir.empty()) throw UsageError("--out is required");
    fs::path p(out.dir);
    if (fs::exists(p)) {
        if (!fs::is_directory(p)) throw UsageError("output path exists and is not a directory: " + out.dir);
        if (!fs::is_empty(p) && !out.force)
            throw UsageError("output directory not empty (pass --force to reuse): " + out.dir);
    }
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_curve_csv(const fs::path& path, const Curve& curve) {
    std::ostringstream out;
    out << "x,y\n";
    out.precision(17);
    for (const auto& [x, y] : curve.points) out << x << "," << y << "\n";
    write_text(path, out.str());
}

void write_labels_tsv(const fs::path& path, const Corpus& corpus, const std::vector<int>& labels) {
    std::ostringstream out;
    for (std::size_t d = 0; d < corpus.n_docs(); ++d)
        out << corpus.documents[d].id << "\t" << labels[d] << "\n";
    write_text(path, out.str());
}

json config_json(const HyperConfig& c, const FitOptions& o) {
    json j;
    j["topics"] = c.topics;
    j["alpha"] = c.alpha;
    j["length_normalize"] = c.length_normalize;
    j["degree_corrected"] = c.degree_corrected;
    j["gamma"] = c.gamma;
    j["theta_zero_threshold"] = c.theta_zero_threshold;
    j["max_iters"] = c.max_iters;
    j["rel_tol"] = c.rel_tol;
    j["seed"] = c.seed;
    j["restarts"] = o.restarts;
    j["jobs"] = o.jobs;
    j["dc_inner_sweeps"] = o.dc_inner_sweeps;
    return j;
}

json manifest_base(const std::string& command, const std::vector<std::string>& argv_echo) {
    json j;
    j["tool"] = "mixtopic";
    j["version"] = kVersion;
    j["formats"] = {{"corpus", "canonical-json"}, {"model", "pmtlm-v1"}, {"truth", "pmtlm-truth-v1"}};
    j["command"] = command;
    j["argv"] = argv_echo;
    return j;
}

json flags_json(const MStepFlags& flags) {
    return json{{"dead_topics", flags.dead_topics},
                {"uniform_theta_rows", flags.uniform_theta_rows},
                {"uniform_beta_rows", flags.uniform_beta_rows},
                {"guarded_dc_updates", flags.guarded_dc_updates}};
}

bool write_truth_labels_if_any(const fs::path& path, const Corpus& corpus) {
    std::ostringstream out;
    std::size_t labeled = 0;
    for (const auto& doc : corpus.documents)
        if (doc.true_label >= 0) {
            out << doc.id << "\t" << doc.true_label << "\n";
            ++labeled;
        }
    if (labeled == 0) return false;
    write_text(path, out.str());
    return true;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct KlFlags {
    bool enabled = false;
    std::size_t top = 10;
};

int run_fit(const InputFlags& in, const FitFlags& f, const KlFlags& kl, const OutFlags& out_flags,
            const std::vector<std::string>& argv_echo) {
    Corpus corpus = load_input(in);
    HyperConfig config = make_config(f);
    FitOptions options = make_options(f);
    const fs::path out = prepare_out(out_flags);

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<ChainResult> chains = run_restart_chains(corpus, config, options);
    const std::size_t best = best_chain(chains);
    FitReport report = summarize_chains(chains, best);

    std::vector<int> labels = harden(chains[best].params.theta);
    json kl_json{{"enabled", false}};
    if (kl.enabled) {
        std::vector<std::size_t> order;
        for (std::size_t r = 0; r < chains.size(); ++r)
            if (chains[r].error.empty() && std::isfinite(chains[r].objective)) order.push_back(r);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (chains[a].objective != chains[b].objective) return chains[a].objective > chains[b].objective;
            return a < b;
        });
        const std::size_t take = std::min(kl.top, order.size());
        json refined_rows = json::array();
        double best_refined = -std::numeric_limits<double>::infinity();
        std::size_t best_restart = 0;
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t r = order[i];
            auto [refined_labels, refined_objective] =
                kl_refine(corpus, harden(chains[r].params.theta), config);
            refined_rows.push_back({{"restart", r},
                                    {"em_objective", chains[r].objective},
                                    {"refined_objective", refined_objective}});
            if (refined_objective > best_refined) {
                best_refined = refined_objective;
                best_restart = r;
                labels = std::move(refined_labels);
            }
        }
        kl_json = {{"enabled", true},
                   {"refine_top", kl.top},
                   {"chains", refined_rows},
                   {"winner_restart", best_restart},
                   {"refined_objective", best_refined}};
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double labels_objective =
        discrete_log_likelihood(corpus, build_discrete_state(corpus, labels, config.topics), config);

    save_model(chains[best].params, (out / "model.json").string());
    write_labels_tsv(out / "labels.tsv", corpus, labels);
    const bool wrote_truth = write_truth_labels_if_any(out / "truth_labels.tsv", corpus);

    json report_json;
    report_json["objective"] = report.objective;
    report_json["iterations"] = report.iterations;
    report_json["converged"] = report.converged;
    report_json["wall_time_seconds"] = wall;
    report_json["restart_index"] = report.restart_index;
    report_json["objective_trace"] = report.objective_trace;
    report_json["restart_objectives"] = report.restart_objectives;
    report_json["restart_errors"] = report.restart_errors;
    report_json["flags"] = flags_json(report.flags);
    report_json["labels_discrete_objective"] = labels_objective;
    report_json["kl_refine"] = kl_json;
    write_json_file(out / "fit_report.json", report_json);

    std::ostringstream table;
    table << "restart\tobjective\tconverged\titerations\terror\n";
    table.precision(17);
    for (const ChainResult& chain : chains)
        table << chain.restart_index << "\t" << chain.objective << "\t" << (chain.converged ? 1 : 0) << "\t"
              << chain.iterations << "\t" << chain.error << "\n";
    write_text(out / "restarts.tsv", table.str());

    json manifest = manifest_base("fit", argv_echo);
    manifest["config"] = config_json(config, options);
    manifest["config"]["kl_refine"] = kl.enabled;
    manifest["config"]["refine_top"] = kl.top;
    manifest["config"]["deterministic"] = f.deterministic;
    manifest["inputs"] = {{"corpus", in.corpus_path}, {"content", in.content_path},
                          {"cites", in.cites_path},  {"binarize", in.binarize}};
    manifest["outputs"] = {"model.json", "fit_report.json", "labels.tsv", "restarts.tsv", "manifest.json"};
    if (wrote_truth) manifest["outputs"].push_back("truth_labels.tsv");
    write_json_file(out / "manifest.json", manifest);

    std::cout << "fit: objective " << report.objective << " after " << report.iterations << " iterations ("
              << (report.converged ? "converged" : "iteration cap") << "), winner restart "
              << report.restart_index << ", outputs in " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict-links
// ---------------------------------------------------------------------------

int run_predict_links(const InputFlags& in, const FitFlags& f, double neg_rate, const OutFlags& out_flags,
                      const std::vector<std::string>& argv_echo) {
    Corpus corpus = load_input(in);
    HyperConfig config = make_config(f);
    FitOptions options = make_options(f);
    const fs::path out = prepare_out(out_flags);

    const LinkPredictionReport report = link_prediction_10fold(corpus, config, options, neg_rate, config.seed);

    json j;
    j["negative_sample_rate"] = neg_rate;
    j["fold_auc"] = report.fold_auc;
    j["mean_auc"] = report.mean_auc;
    j["std_auc"] = report.std_auc;
    j["pooled_auc"] = report.pooled_auc;
    j["fold_objective"] = report.fold_objective;
    write_json_file(out / "link_prediction.json", j);
    write_curve_csv(out / "roc.csv", report.pooled_roc);
    write_curve_csv(out / "pr.csv", report.pooled_pr);

    json manifest = manifest_base("predict-links", argv_echo);
    manifest["config"] = config_json(config, options);
    manifest["config"]["negative_sample_rate"] = neg_rate;
    manifest["config"]["deterministic"] = f.deterministic;
    manifest["inputs"] = {{"corpus", in.corpus_path}, {"content", in.content_path},
                          {"cites", in.cites_path},  {"binarize", in.binarize}};
    manifest["outputs"] = {"link_prediction.json", "roc.csv", "pr.csv", "manifest.json"};
    write_json_file(out / "manifest.json", manifest);

    std::cout << "predict-links: mean AUC " << report.mean_auc << " (std " << report.std_auc << "), pooled AUC "
              << report.pooled_auc << ", outputs in " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

std::map<std::string, int> read_labels_tsv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open labels file: " + path);
    std::map<std::string, int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw UsageError(path + ":" + std::to_string(line_no) + ": expected 'doc_id<TAB>topic_index'");
        const std::string id = line.substr(0, tab);
        const std::string value = line.substr(tab + 1);
        try {
            std::size_t used = 0;
            const int topic = std::stoi(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            if (!labels.emplace(id, topic).second)
                throw UsageError(path + ":" + std::to_string(line_no) + ": duplicate doc id '" + id + "'");
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception&) {
            throw UsageError(path + ":" + std::to_string(line_no) + ": bad topic index '" + value + "'");
        }
    }
    if (labels.empty()) throw UsageError("labels file is empty: " + path);
    return labels;
}

int run_eval(const std::string& labels_path, const std::string& truth_path, const OutFlags& out_flags,
             const std::vector<std::string>& argv_echo) {
    const auto pred_map = read_labels_tsv(labels_path);
    const auto truth_map = read_labels_tsv(truth_path);
    for (const auto& [id, topic] : pred_map)
        if (!truth_map.count(id)) throw UsageError("doc id '" + id + "' missing from " + truth_path);
    for (const auto& [id, topic] : truth_map)
        if (!pred_map.count(id)) throw UsageError("doc id '" + id + "' missing from " + labels_path);

    std::vector<int> pred, truth;
    pred.reserve(pred_map.size());
    for (const auto& [id, topic] : pred_map) {
        pred.push_back(topic);
        truth.push_back(truth_map.at(id));
    }
    json j;
    j["documents"] = pred.size();
    j["nmi"] = nmi(pred, truth);
    j["vi_nats"] = vi(pred, truth);
    j["vi_bits"] = vi_bits(pred, truth);
    j["pwf"] = pwf(pred, truth);
    std::cout << j.dump(2) << "\n";
    if (!out_flags.dir.empty()) {
        const fs::path out = prepare_out(out_flags);
        write_json_file(out / "metrics.json", j);
        json manifest = manifest_base("eval", argv_echo);
        manifest["inputs"] = {{"labels", labels_path}, {"truth", truth_path}};
        manifest["outputs"] = {"metrics.json", "manifest.json"};
        write_json_file(out / "manifest.json", manifest);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

int run_generate(const std::string& fixture, std::uint64_t seed, const OutFlags& out_flags,
                 const std::vector<std::string>& argv_echo) {
    const auto names = fixture_names();
    if (std::find(names.begin(), names.end(), fixture) == names.end()) {
        std::string known;
        for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
        throw UsageError("unknown fixture '" + fixture + "' (known: " + known + ")");
    }
    const fs::path out = prepare_out(out_flags);
    auto [corpus, truth] = planted_fixture(fixture, seed);
    export_canonical(corpus, (out / "corpus.json").string());
    write_json_file(out / "truth.json", truth_to_json(truth));
    write_truth_labels_if_any(out / "truth_labels.tsv", corpus);

    json manifest = manifest_base("generate", argv_echo);
    manifest["config"] = {{"fixture", fixture}, {"seed", seed}};
    manifest["outputs"] = {"corpus.json", "truth.json", "truth_labels.tsv", "manifest.json"};
    write_json_file(out / "manifest.json", manifest);

    std::cout << "generate: " << fixture << " seed " << seed << ": " << corpus.n_docs() << " docs, "
              << corpus.n_links() << " links, outputs in " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int run_bench(const std::vector<std::size_t>& docs_ladder, std::size_t topics, std::size_t words,
              long long length, double degree, std::size_t iters, std::uint64_t seed, bool deterministic,
              const OutFlags& out_flags, const std::vector<std::string>& argv_echo) {
    if (docs_ladder.empty()) throw UsageError("--docs needs at least one size");
    if (iters == 0) throw UsageError("--iters must be positive");

    std::ostringstream csv;
    csv << "N,M,R,K,seconds_per_iteration\n";
    csv.precision(17);
    json traces = json::array();
    for (std::size_t n : docs_ladder) {
        const GroundTruth truth = bench_truth(n, topics, words, length, degree, seed);
        const Corpus corpus = sample_corpus(truth, Rng(fork_seed(seed, n)));
        HyperConfig config;
        config.topics = topics;
        config.alpha = 0.5;
        config.max_iters = iters;
        config.rel_tol = 1e-300;  // run the full iteration budget
        config.seed = seed;
        const auto [params, report] = fit(corpus, config);
        const double per_iter = report.wall_time / double(std::max<std::size_t>(1, report.iterations));
        csv << corpus.n_docs() << "," << corpus.n_links() << "," << corpus.total_distinct() << "," << topics
            << "," << per_iter << "\n";
        traces.push_back({{"n_docs", corpus.n_docs()},
                          {"links", corpus.n_links()},
                          {"distinct_cells", corpus.total_distinct()},
                          {"iterations", report.iterations},
                          {"objective_trace", report.objective_trace}});
        std::cout << "bench: N=" << corpus.n_docs() << " M=" << corpus.n_links()
                  << " R=" << corpus.total_distinct() << " K=" << topics << " " << per_iter
                  << " s/iteration\n";
    }
    if (!out_flags.dir.empty()) {
        const fs::path out = prepare_out(out_flags);
        write_text(out / "bench.csv", csv.str());
        write_json_file(out / "bench_report.json", json{{"deterministic", deterministic}, {"runs", traces}});
        json manifest = manifest_base("bench", argv_echo);
        manifest["config"] = {{"docs", docs_ladder}, {"topics", topics},   {"words", words},
                              {"length", length},    {"degree", degree},   {"iters", iters},
                              {"seed", seed},        {"deterministic", deterministic}};
        manifest["outputs"] = {"bench.csv", "bench_report.json", "manifest.json"};
        write_json_file(out / "manifest.json", manifest);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixtopic: Poisson mixed-topic link models over document networks"};
    app.set_version_flag("--version", std::string("mixtopic ") + kVersion);
    app.require_subcommand(1);
    const std::vector<std::string> argv_echo(argv, argv + argc);

    InputFlags fit_in, pl_in;
    FitFlags fit_flags, pl_flags;
    KlFlags kl;
    OutFlags fit_out, pl_out, eval_out, gen_out, bench_out;

    CLI::App* cmd_fit = app.add_subcommand("fit", "fit a model with EM restarts");
    add_input_flags(cmd_fit, fit_in);
    add_fit_flags(cmd_fit, fit_flags);
    cmd_fit->add_flag("--kl-refine", kl.enabled, "refine the top restart fixed points with Kernighan-Lin sweeps");
    cmd_fit->add_option("--refine-top", kl.top, "how many top restarts to refine (default 10)");
    cmd_fit->add_option("--out", fit_out.dir, "output directory")->required();
    cmd_fit->add_flag("--force", fit_out.force, "reuse a non-empty output directory");

    CLI::App* cmd_pl = app.add_subcommand("predict-links", "10-fold link prediction protocol");
    add_input_flags(cmd_pl, pl_in);
    add_fit_flags(cmd_pl, pl_flags);
    double neg_rate = 1.0;
    cmd_pl->add_option("--neg-rate", neg_rate, "fraction of non-links to score (default 1.0 = all)");
    cmd_pl->add_option("--out", pl_out.dir, "output directory")->required();
    cmd_pl->add_flag("--force", pl_out.force, "reuse a non-empty output directory");

    CLI::App* cmd_eval = app.add_subcommand("eval", "score a labeling against ground truth");
    std::string labels_path, truth_path;
    cmd_eval->add_option("--labels", labels_path, "predicted labels TSV")->required();
    cmd_eval->add_option("--truth", truth_path, "ground truth labels TSV")->required();
    cmd_eval->add_option("--out", eval_out.dir, "optional output directory for metrics.json");
    cmd_eval->add_flag("--force", eval_out.force, "reuse a non-empty output directory");

    CLI::App* cmd_gen = app.add_subcommand("generate", "write a planted fixture corpus and truth sidecar");
    std::string fixture;
    std::uint64_t gen_seed = 1;
    cmd_gen->add_option("--fixture", fixture,
                        "fixture name: two-clusters-strong, three-topics-mixed, degree-heavy-tail")
        ->required();
    cmd_gen->add_option("--seed", gen_seed, "sampler seed");
    cmd_gen->add_option("--out", gen_out.dir, "output directory")->required();
    cmd_gen->add_flag("--force", gen_out.force, "reuse a non-empty output directory");

    CLI::App* cmd_bench = app.add_subcommand("bench", "time EM iterations over a synthetic size ladder");
    std::vector<std::size_t> docs_ladder{1000, 2000, 4000};
    std::size_t bench_topics = 5, bench_words = 2000, bench_iters = 20;
    long long bench_length = 100;
    double bench_degree = 20.0;
    std::uint64_t bench_seed = 1;
    bool bench_deterministic = false;
    cmd_bench->add_option("--docs", docs_ladder, "document counts n1,n2,...")->delimiter(',');
    cmd_bench->add_option("--topics", bench_topics, "topic count");
    cmd_bench->add_option("--words", bench_words, "vocabulary size");
    cmd_bench->add_option("--length", bench_length, "words per document");
    cmd_bench->add_option("--degree", bench_degree, "expected links per document");
    cmd_bench->add_option("--iters", bench_iters, "iterations per size");
    cmd_bench->add_option("--seed", bench_seed, "sampler and fit seed");
    cmd_bench->add_flag("--deterministic", bench_deterministic, "recorded in the report");
    cmd_bench->add_option("--out", bench_out.dir, "optional output directory");
    cmd_bench->add_flag("--force", bench_out.force, "reuse a non-empty output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    fit_flags.jobs_given = cmd_fit->count("--jobs") > 0;
    pl_flags.jobs_given = cmd_pl->count("--jobs") > 0;

    try {
        if (cmd_fit->parsed()) return run_fit(fit_in, fit_flags, kl, fit_out, argv_echo);
        if (cmd_pl->parsed()) return run_predict_links(pl_in, pl_flags, neg_rate, pl_out, argv_echo);
        if (cmd_eval->parsed()) return run_eval(labels_path, truth_path, eval_out, argv_echo);
        if (cmd_gen->parsed()) return run_generate(fixture, gen_seed, gen_out, argv_echo);
        if (cmd_bench->parsed())
            return run_bench(docs_ladder, bench_topics, bench_words, bench_length, bench_degree, bench_iters,
                             bench_seed, bench_deterministic, bench_out, argv_echo);
        std::cerr << "mixtopic: no subcommand given\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "mixtopic: " << e.what() << "\n";
        return 2;
    } catch (const CorpusError& e) {
        std::cerr << "mixtopic: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "mixtopic: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "mixtopic: " << e.what() << "\n";
        return 1;
    }
}
