#pragma once

// Synthetic corpora drawn from known parameters: the ground-truth sampler and
// a registry of planted fixtures used by recovery tests, link-prediction
// checks, and benchmarks. Sampling uses one forked RNG stream per document
// and per pair, so results are seed-deterministic at any parallelism.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace mixtopic {

struct GroundTruth {
    ModelParams params;
    std::vector<long long> lengths;  // L_d
};

inline std::vector<int> truth_labels(const GroundTruth& truth) {
    std::vector<int> labels(truth.params.n_docs());
    for (std::size_t d = 0; d < labels.size(); ++d) {
        const double* row = truth.params.theta.row(d);
        std::size_t best = 0;
        for (std::size_t z = 1; z < truth.params.n_topics(); ++z)
            if (row[z] > row[best]) best = z;
        labels[d] = int(best);
    }
    return labels;
}

inline Corpus sample_corpus(const GroundTruth& truth, const Rng& rng) {
    const std::size_t n = truth.params.n_docs(), k = truth.params.n_topics(), w = truth.params.n_words();
    if (truth.lengths.size() != n) throw std::invalid_argument("sample_corpus: lengths size mismatch");
    for (long long l : truth.lengths)
        if (l < 1) throw std::invalid_argument("sample_corpus: lengths must be >= 1");

    Corpus c;
    for (std::size_t j = 0; j < w; ++j) c.vocabulary.add("w" + std::to_string(j));

    // per-topic cumulative word distributions for inverse-CDF draws
    Matrix beta_cum(k, w);
    for (std::size_t z = 0; z < k; ++z) {
        double run = 0.0;
        for (std::size_t j = 0; j < w; ++j) {
            run += truth.params.beta(z, j);
            beta_cum(z, j) = run;
        }
        beta_cum(z, w - 1) = 1.0;  // absorb rounding in the last cell
    }

    const std::vector<int> labels = truth_labels(truth);
    for (std::size_t d = 0; d < n; ++d) {
        Document doc;
        doc.id = "d" + std::to_string(d);
        doc.true_label = labels[d];
        Rng stream = rng.fork(d);
        const double* th = truth.params.theta.row(d);
        std::map<std::uint32_t, std::uint32_t> acc;
        for (long long i = 0; i < truth.lengths[d]; ++i) {
            double u = stream.next_double();
            std::size_t z = 0;
            for (; z + 1 < k; ++z) {
                if (u < th[z]) break;
                u -= th[z];
            }
            const double v = stream.next_double();
            const double* cum = beta_cum.row(z);
            std::size_t lo = 0, hi = w - 1;
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (cum[mid] > v)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            ++acc[std::uint32_t(lo)];
        }
        for (auto [word, count] : acc) {
            doc.counts.emplace_back(word, count);
            doc.length += count;
        }
        c.documents.push_back(std::move(doc));
    }

    std::vector<Edge> edges;
    for (std::size_t d = 0; d + 1 < n; ++d) {
        for (std::size_t v = d + 1; v < n; ++v) {
            const double mean = expected_links(truth.params, d, v);
            if (mean <= 0.0) continue;
            Rng stream = rng.fork(n + d * n + v);
            const std::uint64_t count = stream.poisson(mean);
            if (count > 0) edges.push_back(Edge{std::uint32_t(d), std::uint32_t(v), std::uint32_t(count)});
        }
    }
    c.links = make_link_graph(n, std::move(edges));
    validate_corpus(c);
    return c;
}

// ---- fixture registry ------------------------------------------------------
//
//  two-clusters-strong   N=200  K=2  W=40  L=50. Two near-pure communities
//                        (theta 0.99/0.01), block word distributions, dense
//                        within-community links (pair mean 2.3). Separation
//                        chosen so the ideal ranking keeps AUC well above 0.9.
//  three-topics-mixed    N=300  K=3  W=60  L=60. 240 near-pure documents plus
//                        60 genuinely mixed ones (theta 0.65/0.25/0.10);
//                        planted label = dominant topic.
//  degree-heavy-tail     N=200  K=2  W=40  L=50. Hard two-community split with
//                        rank^-1 degree propensities normalized per community,
//                        giving degree CV > 1 and a supply of low-degree nodes.

inline GroundTruth planted_truth(const std::string& name) {
    GroundTruth truth;
    auto block_beta = [](std::size_t k, std::size_t w, double inside) {
        Matrix beta(k, w);
        const std::size_t block = w / k;
        for (std::size_t z = 0; z < k; ++z)
            for (std::size_t j = 0; j < w; ++j) {
                const bool own = j >= z * block && j < (z + 1) * block;
                beta(z, j) = own ? inside / double(block) : (1.0 - inside) / double(w - block);
            }
        return beta;
    };

    if (name == "two-clusters-strong") {
        const std::size_t n = 200, k = 2, w = 40;
        truth.params.theta = Matrix(n, k);
        for (std::size_t d = 0; d < n; ++d) {
            const std::size_t g = d < n / 2 ? 0 : 1;
            truth.params.theta(d, g) = 0.99;
            truth.params.theta(d, 1 - g) = 0.01;
        }
        truth.params.beta = block_beta(k, w, 0.9);
        // within-pair mean 2.3 at theta purity 0.99: eta * (0.99^2 + 0.01^2)
        truth.params.eta.assign(k, 2.3 / (0.99 * 0.99 + 0.01 * 0.01));
        truth.lengths.assign(n, 50);
        return truth;
    }
    if (name == "three-topics-mixed") {
        const std::size_t n = 300, k = 3, w = 60;
        truth.params.theta = Matrix(n, k);
        for (std::size_t d = 0; d < n; ++d) {
            const std::size_t major = d % 3;
            if (d < 240) {
                for (std::size_t z = 0; z < k; ++z) truth.params.theta(d, z) = z == major ? 0.90 : 0.05;
            } else {
                truth.params.theta(d, major) = 0.65;
                truth.params.theta(d, (major + 1) % 3) = 0.25;
                truth.params.theta(d, (major + 2) % 3) = 0.10;
            }
        }
        truth.params.beta = block_beta(k, w, 0.9);
        truth.params.eta.assign(k, 1.0);
        truth.lengths.assign(n, 60);
        return truth;
    }
    if (name == "degree-heavy-tail") {
        const std::size_t n = 200, k = 2, w = 40;
        truth.params.theta = Matrix(n, k);
        truth.params.s.assign(n, 0.0);
        const std::size_t half = n / 2;
        double rank_total = 0.0;
        for (std::size_t i = 0; i < half; ++i) rank_total += 1.0 / double(i + 1);
        for (std::size_t d = 0; d < n; ++d) {
            const std::size_t g = d < half ? 0 : 1;
            truth.params.theta(d, g) = 1.0;
            const std::size_t rank = d < half ? d : d - half;
            truth.params.s[d] = (1.0 / double(rank + 1)) / rank_total;  // sums to 1 per community
        }
        truth.params.beta = block_beta(k, w, 0.9);
        truth.params.eta.assign(k, 600.0);
        truth.lengths.assign(n, 50);
        return truth;
    }
    throw std::invalid_argument("unknown fixture '" + name + "'");
}

inline std::vector<std::string> fixture_names() {
    return {"two-clusters-strong", "three-topics-mixed", "degree-heavy-tail"};
}

inline std::pair<Corpus, GroundTruth> planted_fixture(const std::string& name, std::uint64_t seed) {
    GroundTruth truth = planted_truth(name);
    Rng rng(seed);
    return {sample_corpus(truth, rng), std::move(truth)};
}

// Random truth for timing ladders: Dirichlet mixtures, Dirichlet topics, and
// eta scaled so the expected total degree stays ~degree_target as N grows.
inline GroundTruth bench_truth(std::size_t n_docs, std::size_t topics, std::size_t words,
                               long long length, double degree_target, std::uint64_t seed) {
    GroundTruth truth;
    Rng rng(fork_seed(seed, 0x62656e63ULL));  // dedicated stream, disjoint from the sampler's
    truth.params.theta = Matrix(n_docs, topics);
    truth.params.beta = Matrix(topics, words);
    for (std::size_t d = 0; d < n_docs; ++d) rng.dirichlet1(truth.params.theta.row(d), topics);
    for (std::size_t z = 0; z < topics; ++z) rng.dirichlet1(truth.params.beta.row(z), words);
    truth.params.eta.assign(topics, degree_target * double(topics) / double(n_docs));
    truth.lengths.assign(n_docs, length);
    return truth;
}

// ---- truth sidecar ---------------------------------------------------------

inline nlohmann::json truth_to_json(const GroundTruth& truth) {
    nlohmann::json j;
    j["format"] = "pmtlm-truth-v1";
    j["model"] = model_to_json(truth.params);
    j["lengths"] = truth.lengths;
    j["labels"] = truth_labels(truth);
    return j;
}

inline GroundTruth truth_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("format") || j["format"] != "pmtlm-truth-v1")
        throw std::runtime_error("truth sidecar: missing or unsupported format tag");
    GroundTruth truth;
    truth.params = model_from_json(j.at("model"));
    truth.lengths = j.at("lengths").get<std::vector<long long>>();
    return truth;
}

}  // namespace mixtopic
