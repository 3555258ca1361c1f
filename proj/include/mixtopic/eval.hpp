#pragma once

// Evaluation harnesses: clustering agreement metrics (NMI, VI, PWF),
// the 10-fold link prediction protocol (fold split over distinct linked
// pairs, expected-link ranking, Mann-Whitney AUC with half-credit ties,
// ROC / precision-recall curves), and the zero-degree S_d repair.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "em.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace mixtopic {

// ---------------------------------------------------------------------------
// clustering metrics
// ---------------------------------------------------------------------------

namespace detail {

struct Contingency {
    std::size_t total = 0;
    std::vector<long long> row;              // counts per label of a
    std::vector<long long> col;              // counts per label of b
    std::vector<long long> joint;            // row-major |a| x |b|
};

inline Contingency contingency_table(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("labelings differ in length");
    std::map<int, std::size_t> ia, ib;  // compact ids in sorted label order
    for (int v : a) ia.emplace(v, 0);
    for (int v : b) ib.emplace(v, 0);
    std::size_t next = 0;
    for (auto& kv : ia) kv.second = next++;
    next = 0;
    for (auto& kv : ib) kv.second = next++;
    Contingency t;
    t.total = a.size();
    t.row.assign(ia.size(), 0);
    t.col.assign(ib.size(), 0);
    t.joint.assign(ia.size() * ib.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t r = ia[a[i]], c = ib[b[i]];
        ++t.row[r];
        ++t.col[c];
        ++t.joint[r * ib.size() + c];
    }
    return t;
}

inline double entropy_nats(const std::vector<long long>& counts, std::size_t total) {
    double h = 0.0;
    for (long long c : counts)
        if (c > 0) h -= (double(c) / double(total)) * std::log(double(c) / double(total));
    return h;
}

inline double mutual_information_nats(const Contingency& t) {
    double mi = 0.0;
    const std::size_t cols = t.col.size();
    for (std::size_t r = 0; r < t.row.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const long long n = t.joint[r * cols + c];
            if (n > 0)
                mi += (double(n) / double(t.total)) *
                      std::log(double(n) * double(t.total) / (double(t.row[r]) * double(t.col[c])));
        }
    return std::max(mi, 0.0);  // clear float dust on independent tables
}

}  // namespace detail

inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty()) throw std::invalid_argument("nmi: empty labelings");
    const auto t = detail::contingency_table(a, b);
    const double ha = detail::entropy_nats(t.row, t.total);
    const double hb = detail::entropy_nats(t.col, t.total);
    const double hmax = std::max(ha, hb);
    if (hmax == 0.0) return 1.0;  // both labelings constant: identical partitions
    return std::clamp(detail::mutual_information_nats(t) / hmax, 0.0, 1.0);
}

inline double vi(const std::vector<int>& a, const std::vector<int>& b) {
    const auto t = detail::contingency_table(a, b);
    const double value = detail::entropy_nats(t.row, t.total) + detail::entropy_nats(t.col, t.total) -
                         2.0 * detail::mutual_information_nats(t);
    return std::max(value, 0.0);
}

inline double vi_bits(const std::vector<int>& a, const std::vector<int>& b) {
    return vi(a, b) / std::log(2.0);
}

inline double pwf(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() < 2) throw std::invalid_argument("pwf: need at least two documents");
    const auto t = detail::contingency_table(pred, truth);
    auto pairs2 = [](long long n) { return n * (n - 1) / 2; };
    long long same_pred = 0, same_truth = 0, both = 0;
    for (long long c : t.row) same_pred += pairs2(c);
    for (long long c : t.col) same_truth += pairs2(c);
    for (long long c : t.joint) both += pairs2(c);
    const double p = same_pred > 0 ? double(both) / double(same_pred) : 0.0;
    const double r = same_truth > 0 ? double(both) / double(same_truth) : 0.0;
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

// ---------------------------------------------------------------------------
// fold split
// ---------------------------------------------------------------------------

struct Fold {
    Corpus train;                                     // fold links removed, degrees rebuilt
    std::vector<std::pair<std::uint32_t, std::uint32_t>> test_pairs;
};

// Folds are drawn over distinct linked pairs so that a held-out pair never
// keeps residual multiplicity in its own training graph; a pair's full count
// moves with it.
inline std::vector<Fold> split_links_10fold(const Corpus& corpus, std::uint64_t seed) {
    const auto& edges = corpus.links.edges;
    if (edges.size() < 10) throw std::invalid_argument("split_links_10fold: fewer than 10 distinct linked pairs");
    std::vector<std::size_t> order(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(fork_seed(seed, 0x666f6c64ULL));
    rng.shuffle(order);

    std::vector<Fold> folds(10);
    std::vector<int> fold_of(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = int(i % 10);
    for (int f = 0; f < 10; ++f) {
        std::vector<Edge> train_edges;
        train_edges.reserve(edges.size());
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (fold_of[e] == f)
                folds[f].test_pairs.emplace_back(edges[e].u, edges[e].v);
            else
                train_edges.push_back(edges[e]);
        }
        folds[f].train = corpus;
        folds[f].train.links = make_link_graph(corpus.n_docs(), train_edges);
        std::sort(folds[f].test_pairs.begin(), folds[f].test_pairs.end());
    }
    return folds;
}

// ---------------------------------------------------------------------------
// zero-degree repair and ranking
// ---------------------------------------------------------------------------

inline ModelParams repair_zero_degree(const ModelParams& params, const Corpus& train) {
    if (!params.degree_corrected()) throw std::invalid_argument("repair_zero_degree: model is not degree corrected");
    if (params.s.size() != train.n_docs()) throw std::invalid_argument("repair_zero_degree: corpus size mismatch");
    ModelParams out = params;
    bool any_zero = false;
    double min_pos = std::numeric_limits<double>::infinity();
    for (double v : out.s) {
        if (v > 0.0)
            min_pos = std::min(min_pos, v);
        else
            any_zero = true;
    }
    if (!any_zero) return out;
    if (!std::isfinite(min_pos)) throw std::invalid_argument("repair_zero_degree: no positive degree factor exists");
    for (double& v : out.s)
        if (v <= 0.0) v = min_pos;
    return out;
}

struct ScoredPair {
    std::uint32_t u = 0, v = 0;
    double score = 0.0;
    bool positive = false;
};

struct RankedPairs {
    std::vector<ScoredPair> pairs;  // descending score; ties by (u, v)
};

struct Curve {
    std::vector<std::pair<double, double>> points;
};

struct RankingScores {
    RankedPairs ranked;
    double auc = 0.0;
    Curve roc;
    Curve pr;
};

inline double auc_brute_force(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty() || neg.empty()) throw std::invalid_argument("auc: empty score set");
    unsigned long long twice = 0;
    for (double p : pos)
        for (double q : neg) {
            if (p > q)
                twice += 2;
            else if (p == q)
                twice += 1;
        }
    return double(twice) / (2.0 * double(pos.size()) * double(neg.size()));
}

namespace detail {

// Rank statistic plus curves from an arbitrary scored list. Tied scores earn
// half credit in the AUC and step diagonally in the ROC, which makes the
// trapezoidal area under the emitted curve equal the rank AUC.
inline RankingScores score_ranked(std::vector<ScoredPair> pairs) {
    std::size_t n_pos = 0, n_neg = 0;
    for (const auto& sp : pairs) (sp.positive ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("ranking: empty positive or negative set");
    std::sort(pairs.begin(), pairs.end(), [](const ScoredPair& x, const ScoredPair& y) {
        if (x.score != y.score) return x.score > y.score;
        return std::pair(x.u, x.v) < std::pair(y.u, y.v);
    });

    RankingScores out;
    out.roc.points.emplace_back(0.0, 0.0);
    out.pr.points.emplace_back(0.0, 1.0);  // conventional anchor at zero recall
    unsigned long long twice_u = 0;        // 2 * sum over positives of negatives ranked below
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < pairs.size()) {
        std::size_t j = i, gp = 0, gn = 0;
        while (j < pairs.size() && pairs[j].score == pairs[i].score) {
            (pairs[j].positive ? gp : gn) += 1;
            ++j;
        }
        twice_u += 2ULL * gp * (n_neg - fp - gn) + 1ULL * gp * gn;
        tp += gp;
        fp += gn;
        out.roc.points.emplace_back(double(fp) / double(n_neg), double(tp) / double(n_pos));
        out.pr.points.emplace_back(double(tp) / double(n_pos), double(tp) / double(tp + fp));
        i = j;
    }
    out.auc = double(twice_u) / (2.0 * double(n_pos) * double(n_neg));
    out.ranked.pairs = std::move(pairs);
    return out;
}

inline std::uint64_t pair_key(std::uint32_t u, std::uint32_t v) {
    return (std::uint64_t(u) << 32) | v;
}

}  // namespace detail

// Scores every held-out positive and every candidate non-link (pairs without
// an observed link in the training graph) by the model's expected link count.
// negative_sample_rate < 1 subsamples the non-links reproducibly from `seed`.
inline RankingScores rank_and_score(const ModelParams& params, const Corpus& train,
                                    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& positives,
                                    double negative_sample_rate, std::uint64_t seed) {
    if (!(negative_sample_rate > 0.0) || negative_sample_rate > 1.0)
        throw std::invalid_argument("rank_and_score: negative sample rate must lie in (0, 1]");
    const std::size_t n = train.n_docs();
    std::unordered_set<std::uint64_t> linked, held_out;
    for (const Edge& e : train.links.edges) linked.insert(detail::pair_key(e.u, e.v));
    std::vector<ScoredPair> scored;
    for (auto [u, v] : positives) {
        if (u == v) throw std::invalid_argument("rank_and_score: self pair in positives");
        if (u > v) std::swap(u, v);
        if (v >= n) throw std::invalid_argument("rank_and_score: positive pair out of range");
        if (linked.count(detail::pair_key(u, v))) throw std::invalid_argument("rank_and_score: positive pair has a training link");
        if (!held_out.insert(detail::pair_key(u, v)).second)
            throw std::invalid_argument("rank_and_score: duplicate positive pair");
        scored.push_back({u, v, expected_links(params, u, v), true});
    }
    if (scored.empty()) throw std::invalid_argument("rank_and_score: no positives");

    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates;
    for (std::uint32_t u = 0; u + 1 < n; ++u)
        for (std::uint32_t v = u + 1; v < n; ++v) {
            const std::uint64_t key = detail::pair_key(u, v);
            if (!linked.count(key) && !held_out.count(key)) candidates.emplace_back(u, v);
        }
    if (negative_sample_rate < 1.0 && candidates.size() > 1) {
        std::size_t keep = std::size_t(std::llround(negative_sample_rate * double(candidates.size())));
        keep = std::clamp<std::size_t>(keep, 1, candidates.size());
        Rng rng(fork_seed(seed, 0x6e656773ULL));
        rng.shuffle(candidates);
        candidates.resize(keep);
        std::sort(candidates.begin(), candidates.end());
    }
    for (auto [u, v] : candidates) scored.push_back({u, v, expected_links(params, u, v), false});
    return detail::score_ranked(std::move(scored));
}

// ---------------------------------------------------------------------------
// 10-fold driver
// ---------------------------------------------------------------------------

struct LinkPredictionReport {
    std::vector<double> fold_auc;
    double mean_auc = 0.0;
    double std_auc = 0.0;     // sample standard deviation across folds
    double pooled_auc = 0.0;  // single ranking over all folds' scored pairs
    Curve pooled_roc;
    Curve pooled_pr;
    std::vector<double> fold_objective;
};

inline LinkPredictionReport link_prediction_10fold(const Corpus& corpus, const HyperConfig& config,
                                                   const FitOptions& options, double negative_sample_rate,
                                                   std::uint64_t seed) {
    const auto folds = split_links_10fold(corpus, seed);
    LinkPredictionReport report;
    std::vector<ScoredPair> pooled;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        HyperConfig fold_config = config;
        fold_config.seed = fork_seed(config.seed, 0x1000 + f);
        auto [params, fit_report] = fit_ex(folds[f].train, fold_config, options);
        if (params.degree_corrected()) params = repair_zero_degree(params, folds[f].train);
        const RankingScores scores = rank_and_score(params, folds[f].train, folds[f].test_pairs,
                                                    negative_sample_rate, fork_seed(seed, 0x2000 + f));
        report.fold_auc.push_back(scores.auc);
        report.fold_objective.push_back(fit_report.objective);
        pooled.insert(pooled.end(), scores.ranked.pairs.begin(), scores.ranked.pairs.end());
    }
    double mean = 0.0;
    for (double a : report.fold_auc) mean += a;
    mean /= double(report.fold_auc.size());
    double var = 0.0;
    for (double a : report.fold_auc) var += (a - mean) * (a - mean);
    report.mean_auc = mean;
    report.std_auc = std::sqrt(var / double(report.fold_auc.size() - 1));
    const RankingScores pooled_scores = detail::score_ranked(std::move(pooled));
    report.pooled_auc = pooled_scores.auc;
    report.pooled_roc = pooled_scores.roc;
    report.pooled_pr = pooled_scores.pr;
    return report;
}

}  // namespace mixtopic
