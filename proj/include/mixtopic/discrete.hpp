#pragma once

// Hard-label machinery: argmax hardening, the plug-in likelihood for discrete
// labels (full K x K interaction matrix, closed-form MLEs), incremental move
// deltas, and Kernighan-Lin style refinement sweeps with revert-to-best.
//
// All counting statistics are integers and updated exactly; the only floating
// state is the 1/L_d-weighted count table used when length normalization is on.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "matrix.hpp"
#include "model.hpp"

namespace mixtopic {

inline std::vector<int> harden(const Matrix& theta) {
    std::vector<int> labels(theta.rows);
    for (std::size_t d = 0; d < theta.rows; ++d) {
        const double* row = theta.row(d);
        std::size_t best = 0;
        for (std::size_t z = 1; z < theta.cols; ++z)
            if (row[z] > row[best]) best = z;  // ties keep the lowest index
        labels[d] = int(best);
    }
    return labels;
}

struct DiscreteState {
    std::size_t k = 0;
    std::vector<int> labels;            // z_d
    std::vector<long long> n;           // documents per topic
    std::vector<long long> l_tot;       // L_z = sum of L_d
    std::vector<long long> c;           // K x W: C_zw
    std::vector<double> cw;             // K x W: sum_{d in z} C_dw / L_d
    std::vector<long long> m;           // K x K: links between topics, diagonal doubled

    long long& c_at(std::size_t z, std::size_t w_, std::size_t w_cols) { return c[z * w_cols + w_]; }
    long long c_at(std::size_t z, std::size_t w_, std::size_t w_cols) const { return c[z * w_cols + w_]; }
};

inline DiscreteState build_discrete_state(const Corpus& corpus, const std::vector<int>& labels,
                                          std::size_t k) {
    const std::size_t n = corpus.n_docs(), w = corpus.n_words();
    if (labels.size() != n) throw std::invalid_argument("discrete state: labels size mismatch");
    DiscreteState st;
    st.k = k;
    st.labels = labels;
    st.n.assign(k, 0);
    st.l_tot.assign(k, 0);
    st.c.assign(k * w, 0);
    st.cw.assign(k * w, 0.0);
    st.m.assign(k * k, 0);
    for (std::size_t d = 0; d < n; ++d) {
        const int z = labels[d];
        if (z < 0 || std::size_t(z) >= k) throw std::invalid_argument("discrete state: label out of range");
        const Document& doc = corpus.documents[d];
        ++st.n[z];
        st.l_tot[z] += doc.length;
        for (const auto& [word, count] : doc.counts) {
            st.c[std::size_t(z) * w + word] += count;
            st.cw[std::size_t(z) * w + word] += double(count) / double(doc.length);
        }
    }
    for (const Edge& e : corpus.links.edges) {
        const std::size_t zu = std::size_t(labels[e.u]), zv = std::size_t(labels[e.v]);
        st.m[zu * k + zv] += e.count;
        st.m[zv * k + zu] += e.count;  // doubles the diagonal when zu == zv
    }
    return st;
}

namespace detail {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
inline double xlogy(double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; }

}  // namespace detail

// Plug-in likelihood: MLE word distributions C_zw/L_z and interaction rates
// m_zz'/(n_z n_z'), combined with the configured alpha / length-normalization
// weighting. Empty topics contribute nothing.
inline double discrete_log_likelihood(const Corpus& corpus, const DiscreteState& st,
                                      const HyperConfig& config) {
    const std::size_t k = st.k, w = corpus.n_words();
    double total = 0.0;
    if (config.alpha > 0.0) {
        CompensatedSum content;
        for (std::size_t z = 0; z < k; ++z) {
            for (std::size_t j = 0; j < w; ++j) {
                const long long cv = st.c[z * w + j];
                if (cv <= 0) continue;
                const double weight = config.length_normalize ? st.cw[z * w + j] : double(cv);
                content.add(weight * std::log(double(cv)));
            }
            const double docs_or_length = config.length_normalize ? double(st.n[z]) : double(st.l_tot[z]);
            content.add(-detail::xlogy(docs_or_length, double(st.l_tot[z])));
        }
        total += config.alpha * content.value();
    }
    if (config.alpha < 1.0) {
        CompensatedSum links;
        for (std::size_t z = 0; z < k; ++z) {
            long long rowm = 0;
            for (std::size_t z2 = 0; z2 < k; ++z2) {
                const long long mv = st.m[z * k + z2];
                rowm += mv;
                links.add(0.5 * detail::xlogx(double(mv)));
            }
            links.add(-detail::xlogy(double(rowm), double(st.n[z])));
        }
        total += (1.0 - config.alpha) * links.value();
    }
    return total;
}

// Likelihood change from relabeling document d to z_new, computed from the
// affected statistics only: O(K + R_d + deg_d). Does not mutate the state.
inline double move_delta(const DiscreteState& st, const Corpus& corpus, const HyperConfig& config,
                         std::size_t d, int z_new) {
    const int z_old = st.labels[d];
    if (z_new == z_old) throw std::invalid_argument("move_delta: document already carries that label");
    if (z_new < 0 || std::size_t(z_new) >= st.k) throw std::invalid_argument("move_delta: label out of range");
    const std::size_t k = st.k, w = corpus.n_words();
    const std::size_t a = std::size_t(z_old), b = std::size_t(z_new);
    const Document& doc = corpus.documents[d];
    double delta = 0.0;

    if (config.alpha > 0.0) {
        double content = 0.0;
        const double inv_l = 1.0 / double(doc.length);
        for (const auto& [word, count] : doc.counts) {
            const long long ca = st.c[a * w + word], cb = st.c[b * w + word];
            if (config.length_normalize) {
                const double wa = st.cw[a * w + word], wb = st.cw[b * w + word];
                const double shift = double(count) * inv_l;
                content += detail::xlogy(wa - shift, double(ca - count)) - detail::xlogy(wa, double(ca));
                content += detail::xlogy(wb + shift, double(cb + count)) - detail::xlogy(wb, double(cb));
            } else {
                content += detail::xlogx(double(ca - count)) - detail::xlogx(double(ca));
                content += detail::xlogx(double(cb + count)) - detail::xlogx(double(cb));
            }
        }
        if (config.length_normalize) {
            content -= detail::xlogy(double(st.n[a] - 1), double(st.l_tot[a] - doc.length)) -
                       detail::xlogy(double(st.n[a]), double(st.l_tot[a]));
            content -= detail::xlogy(double(st.n[b] + 1), double(st.l_tot[b] + doc.length)) -
                       detail::xlogy(double(st.n[b]), double(st.l_tot[b]));
        } else {
            content -= detail::xlogx(double(st.l_tot[a] - doc.length)) - detail::xlogx(double(st.l_tot[a]));
            content -= detail::xlogx(double(st.l_tot[b] + doc.length)) - detail::xlogx(double(st.l_tot[b]));
        }
        delta += config.alpha * content;
    }

    if (config.alpha < 1.0) {
        std::vector<long long> cnt(k, 0);  // d's link mass into each topic
        long long kappa = 0;
        for (const auto& [neighbor, eidx] : corpus.links.adj[d]) {
            const long long count = corpus.links.edges[eidx].count;
            cnt[std::size_t(st.labels[neighbor])] += count;
            kappa += count;
        }
        double links = 0.0;
        auto cell = [&](std::size_t z1, std::size_t z2) { return double(st.m[z1 * k + z2]); };
        for (std::size_t z = 0; z < k; ++z) {
            if (z == a || z == b) continue;
            // row and matching column change identically; count each pair once via the factor 1
            links += detail::xlogx(cell(a, z) - double(cnt[z])) - detail::xlogx(cell(a, z));
            links += detail::xlogx(cell(b, z) + double(cnt[z])) - detail::xlogx(cell(b, z));
        }
        links += 0.5 * (detail::xlogx(cell(a, a) - 2.0 * double(cnt[a])) - detail::xlogx(cell(a, a)));
        links += 0.5 * (detail::xlogx(cell(b, b) + 2.0 * double(cnt[b])) - detail::xlogx(cell(b, b)));
        links += detail::xlogx(cell(a, b) + double(cnt[a]) - double(cnt[b])) - detail::xlogx(cell(a, b));

        // row mass = sum of degree masses of the row's documents, so moving d
        // shifts exactly kappa from row a to row b
        long long rowm_a = 0, rowm_b = 0;
        for (std::size_t z = 0; z < k; ++z) {
            rowm_a += st.m[a * k + z];
            rowm_b += st.m[b * k + z];
        }
        links -= detail::xlogy(double(rowm_a - kappa), double(st.n[a] - 1)) -
                 detail::xlogy(double(rowm_a), double(st.n[a]));
        links -= detail::xlogy(double(rowm_b + kappa), double(st.n[b] + 1)) -
                 detail::xlogy(double(rowm_b), double(st.n[b]));
        delta += (1.0 - config.alpha) * links;
    }
    return delta;
}

inline void apply_move(DiscreteState& st, const Corpus& corpus, std::size_t d, int z_new) {
    const int z_old = st.labels[d];
    if (z_new == z_old) throw std::invalid_argument("apply_move: document already carries that label");
    const std::size_t k = st.k, w = corpus.n_words();
    const std::size_t a = std::size_t(z_old), b = std::size_t(z_new);
    const Document& doc = corpus.documents[d];

    --st.n[a];
    ++st.n[b];
    st.l_tot[a] -= doc.length;
    st.l_tot[b] += doc.length;
    const double inv_l = 1.0 / double(doc.length);
    for (const auto& [word, count] : doc.counts) {
        st.c[a * w + word] -= count;
        st.c[b * w + word] += count;
        st.cw[a * w + word] -= double(count) * inv_l;
        st.cw[b * w + word] += double(count) * inv_l;
        if (st.c[a * w + word] == 0) st.cw[a * w + word] = 0.0;  // kill residual float dust
    }
    for (const auto& [neighbor, eidx] : corpus.links.adj[d]) {
        const long long count = corpus.links.edges[eidx].count;
        const std::size_t zn = std::size_t(st.labels[neighbor]);
        st.m[a * k + zn] -= count;
        st.m[zn * k + a] -= count;
        st.m[b * k + zn] += count;
        st.m[zn * k + b] += count;
    }
    st.labels[d] = z_new;
}

// Kernighan-Lin sweeps: every document is moved exactly once per sweep, each
// time taking the globally best (document, target) delta even when negative;
// the sweep then reverts to the best prefix seen. Repeats until a sweep brings
// no strict improvement. Ties break toward the lowest document, then topic.
inline std::pair<std::vector<int>, double> kl_refine(const Corpus& corpus,
                                                     const std::vector<int>& initial,
                                                     const HyperConfig& config) {
    const std::size_t n = corpus.n_docs(), k = config.topics;
    DiscreteState st = build_discrete_state(corpus, initial, k);
    double current = discrete_log_likelihood(corpus, st, config);

    for (;;) {
        const std::vector<int> sweep_start_labels = st.labels;
        const double sweep_start = current;
        std::vector<std::uint8_t> moved(n, 0);
        std::vector<std::pair<std::size_t, int>> moves;
        moves.reserve(n);
        double running = current, best_running = current;
        std::size_t best_prefix = 0;

        for (std::size_t step = 0; step < n; ++step) {
            double best_delta = -std::numeric_limits<double>::infinity();
            std::size_t best_doc = n;
            int best_topic = -1;
            for (std::size_t d = 0; d < n; ++d) {
                if (moved[d]) continue;
                for (std::size_t z = 0; z < k; ++z) {
                    if (int(z) == st.labels[d]) continue;
                    const double delta = move_delta(st, corpus, config, d, int(z));
                    if (delta > best_delta) {
                        best_delta = delta;
                        best_doc = d;
                        best_topic = int(z);
                    }
                }
            }
            if (best_doc == n) break;  // K = 1: no legal move exists
            apply_move(st, corpus, best_doc, best_topic);
            moved[best_doc] = 1;
            moves.emplace_back(best_doc, best_topic);
            running += best_delta;
            if (running > best_running) {
                best_running = running;
                best_prefix = moves.size();
            }
        }

        // rebuild the best prefix exactly and accept only strict improvement
        std::vector<int> prefix_labels = sweep_start_labels;
        for (std::size_t i = 0; i < best_prefix; ++i) prefix_labels[moves[i].first] = moves[i].second;
        DiscreteState best_state = build_discrete_state(corpus, prefix_labels, k);
        const double exact = discrete_log_likelihood(corpus, best_state, config);
        if (best_prefix == 0 || !(exact > sweep_start)) return {sweep_start_labels, sweep_start};
        st = std::move(best_state);
        current = exact;
    }
}

}  // namespace mixtopic
