#pragma once

// Model parameters for the mixed-topic link model and its degree-corrected
// variant, the balanced objective they are fit against, and checkpoint I/O.
//
// Conventions fixed here and relied on everywhere else:
//  - pair sums in the Poisson mass term run over ordered pairs including
//    d = d' cross terms, so the mass is (1/2) sum_z eta_z T_z^2 with
//    T_z = sum_d theta_dz (or sum_d S_d theta_dz when degree-corrected);
//  - the adjacency diagonal is always zero, so the log term never sees it;
//  - the constant -sum log A_dd'! is omitted throughout.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace mixtopic {

struct HyperConfig {
    std::size_t topics = 1;               // K
    double alpha = 0.5;                   // content/link balance in [0,1]
    bool length_normalize = true;         // divide each content term by L_d
    bool degree_corrected = false;
    std::vector<double> gamma;            // optional K Dirichlet parameters, each >= 1
    double theta_zero_threshold = 0.0;    // 0 disables hard-zero clamping
    std::size_t max_iters = 5000;
    double rel_tol = 1e-7;
    std::uint64_t seed = 1;

    bool has_prior() const {
        for (double g : gamma)
            if (g != 1.0) return true;
        return false;
    }
    // pseudocount t_z = gamma_z - 1 (zero when no prior is configured)
    double pseudo(std::size_t z) const { return gamma.empty() ? 0.0 : gamma[z] - 1.0; }
    double pseudo_total() const {
        double s = 0.0;
        for (std::size_t z = 0; z < gamma.size(); ++z) s += gamma[z] - 1.0;
        return s;
    }

    void validate() const {
        if (topics < 1) throw std::invalid_argument("config: topics must be >= 1");
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("config: alpha must lie in [0,1]");
        if (!gamma.empty() && gamma.size() != topics)
            throw std::invalid_argument("config: gamma must have one entry per topic");
        for (double g : gamma)
            if (!(g >= 1.0)) throw std::invalid_argument("config: gamma entries must be >= 1");
        if (theta_zero_threshold < 0.0) throw std::invalid_argument("config: theta-threshold must be >= 0");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
    }
};

struct ModelParams {
    Matrix theta;           // N x K, rows on the simplex
    Matrix beta;            // K x W, rows on the simplex
    std::vector<double> eta;  // K, non-negative
    std::vector<double> s;    // N, non-negative; empty unless degree-corrected

    std::size_t n_docs() const { return theta.rows; }
    std::size_t n_topics() const { return theta.cols; }
    std::size_t n_words() const { return beta.cols; }
    bool degree_corrected() const { return !s.empty(); }
};

inline ModelParams init_random(const Corpus& corpus, const HyperConfig& config, Rng& rng) {
    config.validate();
    const std::size_t n = corpus.n_docs(), k = config.topics, w = corpus.n_words();
    ModelParams p;
    p.theta = Matrix(n, k);
    p.beta = Matrix(k, w);
    for (std::size_t d = 0; d < n; ++d) rng.dirichlet1(p.theta.row(d), k);
    for (std::size_t z = 0; z < k; ++z) rng.dirichlet1(p.beta.row(z), w);
    // eta starts at 2M/K so sum_z eta_z = 2M from the outset; S_d starts at
    // kappa_d N / 2M so average-degree nodes sit near 1. The first M-step
    // rescales both, so only the relative values matter.
    const double m2 = double(2 * corpus.n_links());
    p.eta.assign(k, m2 > 0.0 ? m2 / double(k) : 0.0);
    if (config.degree_corrected) {
        p.s.assign(n, 0.0);
        if (m2 > 0.0)
            for (std::size_t d = 0; d < n; ++d)
                p.s[d] = double(corpus.links.degree[d]) * double(n) / m2;
    }
    return p;
}

// Expected number of links between two distinct documents (the Poisson mean).
inline double expected_links(const ModelParams& p, std::size_t d, std::size_t d2) {
    if (d == d2) throw std::invalid_argument("expected_links: d and d2 must differ");
    const double* a = p.theta.row(d);
    const double* b = p.theta.row(d2);
    double m = 0.0;
    for (std::size_t z = 0; z < p.n_topics(); ++z) m += a[z] * b[z] * p.eta[z];
    if (p.degree_corrected()) m *= p.s[d] * p.s[d2];
    return m;
}

// Balanced objective: alpha * sum_d [1/L_d] L^content_d + (1-alpha) * L^links,
// plus sum_dz t_z log theta_dz when pseudocounts are configured. Returns
// -infinity when a required log argument is zero, so restart loops can
// discard degenerate states cheaply.
inline double log_likelihood(const Corpus& corpus, const ModelParams& p, const HyperConfig& config) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const std::size_t n = corpus.n_docs(), k = config.topics;
    double total = 0.0;

    if (config.alpha > 0.0) {
        CompensatedSum content;
        for (std::size_t d = 0; d < n; ++d) {
            const Document& doc = corpus.documents[d];
            const double* th = p.theta.row(d);
            double doc_term = 0.0;
            for (const auto& [word, count] : doc.counts) {
                double mix = 0.0;
                for (std::size_t z = 0; z < k; ++z) mix += th[z] * p.beta(z, word);
                if (mix <= 0.0) return neg_inf;
                doc_term += double(count) * std::log(mix);
            }
            content.add(config.length_normalize ? doc_term / double(doc.length) : doc_term);
        }
        total += config.alpha * content.value();
    }

    if (config.alpha < 1.0) {
        CompensatedSum log_term;
        for (const Edge& e : corpus.links.edges) {
            double mean = expected_links(p, e.u, e.v);
            // !(mean > 0) also catches NaN; an overflowed mean would otherwise
            // leave inf - inf = NaN once the mass term overflows as well
            if (!(mean > 0.0) || std::isinf(mean)) return neg_inf;
            log_term.add(double(e.count) * std::log(mean));
        }
        std::vector<double> t(k, 0.0);
        for (std::size_t d = 0; d < n; ++d) {
            const double* th = p.theta.row(d);
            const double sd = p.degree_corrected() ? p.s[d] : 1.0;
            for (std::size_t z = 0; z < k; ++z) t[z] += sd * th[z];
        }
        double mass = 0.0;
        for (std::size_t z = 0; z < k; ++z) mass += p.eta[z] * t[z] * t[z];
        total += (1.0 - config.alpha) * (log_term.value() - 0.5 * mass);
    }

    if (config.has_prior()) {
        for (std::size_t z = 0; z < k; ++z) {
            const double tz = config.pseudo(z);
            if (tz == 0.0) continue;
            for (std::size_t d = 0; d < n; ++d) {
                const double v = p.theta(d, z);
                if (v <= 0.0) return neg_inf;
                total += tz * std::log(v);
            }
        }
    }
    return total;
}

// ---- checkpoint I/O ------------------------------------------------------

inline nlohmann::json model_to_json(const ModelParams& p) {
    nlohmann::json j;
    j["format"] = "pmtlm-v1";
    j["n_docs"] = p.n_docs();
    j["n_topics"] = p.n_topics();
    j["n_words"] = p.n_words();
    j["degree_corrected"] = p.degree_corrected();
    auto mat_rows = [](const Matrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t r = 0; r < m.rows; ++r)
            rows.push_back(std::vector<double>(m.row(r), m.row(r) + m.cols));
        return rows;
    };
    j["theta"] = mat_rows(p.theta);
    j["beta"] = mat_rows(p.beta);
    j["eta"] = p.eta;
    if (p.degree_corrected()) j["s"] = p.s;
    return j;
}

inline ModelParams model_from_json(const nlohmann::json& j) {
    auto fail = [](const std::string& what) { throw std::runtime_error("model checkpoint: " + what); };
    if (!j.is_object() || !j.contains("format") || j["format"] != "pmtlm-v1")
        fail("missing or unsupported format tag (expected \"pmtlm-v1\")");
    ModelParams p;
    const std::size_t n = j.at("n_docs").get<std::size_t>();
    const std::size_t k = j.at("n_topics").get<std::size_t>();
    const std::size_t w = j.at("n_words").get<std::size_t>();
    auto read_mat = [&](const char* key, std::size_t rows, std::size_t cols) {
        Matrix m(rows, cols);
        const auto& jr = j.at(key);
        if (!jr.is_array() || jr.size() != rows) fail(std::string(key) + " has wrong shape");
        for (std::size_t r = 0; r < rows; ++r) {
            const auto& row = jr[r];
            if (!row.is_array() || row.size() != cols) fail(std::string(key) + " has wrong shape");
            for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
        }
        return m;
    };
    p.theta = read_mat("theta", n, k);
    p.beta = read_mat("beta", k, w);
    p.eta = j.at("eta").get<std::vector<double>>();
    if (p.eta.size() != k) fail("eta has wrong shape");
    if (j.value("degree_corrected", false)) {
        p.s = j.at("s").get<std::vector<double>>();
        if (p.s.size() != n) fail("s has wrong shape");
    }
    return p;
}

inline void save_model(const ModelParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model checkpoint: " + path);
    out << model_to_json(p).dump() << "\n";
}

inline ModelParams load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": JSON parse error: " + e.what());
    }
    return model_from_json(j);
}

}  // namespace mixtopic
