#pragma once

// EM inference. The E-step is the exact posterior split of word occurrences
// and links over topics. The M-step maximizes the EM lower bound blockwise:
//
//  - vanilla theta: each row solves num_dz / theta_dz = lambda_d + c_z T_z
//    with c_z = (1-alpha) eta_z^old and T_z = sum_d theta_dz. The c_z T_z
//    term is the derivative of the Poisson mass term; dropping it (which
//    makes the update a bare normalization) breaks ascent for 0 < alpha < 1.
//    Rows couple only through T, so a short fixed-point loop over T with a
//    safeguarded Newton solve for each row's lambda_d is exact and cheap.
//    When (1-alpha) eta == 0 this reduces to plain row normalization.
//  - beta, eta: closed-form maximizers (eta evaluated with the new theta).
//  - degree-corrected: eta_z = sum A q(z) (so sum_z eta_z = 2M exactly),
//    then an inner loop theta -> xi -> S, warm-started from the previous
//    iterate; at its fixed point rows are exactly normalized and
//    sum_d S_d theta_dz = 1.
//
// Restart chains are embarrassingly parallel; all reductions are fixed-order
// so a given seed yields bitwise-identical traces at any worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "matrix.hpp"
#include "model.hpp"

namespace mixtopic {

struct EmError : std::runtime_error {
    explicit EmError(const std::string& msg) : std::runtime_error(msg) {}
};

// E-step posteriors, stored densely over the sparse supports: one K-row per
// stored word count (document-major, slot order) and one per undirected edge.
struct Responsibilities {
    Matrix h;                           // R x K
    Matrix q;                           // E x K
    std::vector<std::size_t> h_offset;  // N+1 prefix: rows of document d start at h_offset[d]
};

// skip_content / skip_links omit the h or q tables; fit uses them at the
// alpha endpoints where the corresponding objective term has zero weight
// (and where a zero denominator in the unused table must not abort a chain).
inline void e_step_into(const Corpus& corpus, const ModelParams& p, Responsibilities& resp,
                        bool skip_content = false, bool skip_links = false) {
    const std::size_t n = corpus.n_docs(), k = p.n_topics();
    std::size_t slots = 0;
    resp.h_offset.assign(n + 1, 0);
    for (std::size_t d = 0; d < n; ++d) {
        slots += corpus.documents[d].distinct();
        resp.h_offset[d + 1] = slots;
    }
    const std::size_t h_rows = skip_content ? 0 : slots;
    const std::size_t q_rows = skip_links ? 0 : corpus.links.edges.size();
    if (resp.h.rows != h_rows || resp.h.cols != k) resp.h = Matrix(h_rows, k);
    if (resp.q.rows != q_rows || resp.q.cols != k) resp.q = Matrix(q_rows, k);

    for (std::size_t d = 0; d < n && !skip_content; ++d) {
        const Document& doc = corpus.documents[d];
        const double* th = p.theta.row(d);
        std::size_t row = resp.h_offset[d];
        for (const auto& [word, count] : doc.counts) {
            double* out = resp.h.row(row++);
            double mix = 0.0;
            for (std::size_t z = 0; z < k; ++z) {
                out[z] = th[z] * p.beta(z, word);
                mix += out[z];
            }
            if (mix <= 0.0)
                throw EmError("e-step: zero word-mixture probability at document '" + doc.id + "', word '" +
                              corpus.vocabulary.words[word] + "'");
            for (std::size_t z = 0; z < k; ++z) out[z] /= mix;
        }
    }
    for (std::size_t e = 0; e < q_rows; ++e) {
        const Edge& edge = corpus.links.edges[e];
        const double* tu = p.theta.row(edge.u);
        const double* tv = p.theta.row(edge.v);
        double* out = resp.q.row(e);
        double sum = 0.0;
        for (std::size_t z = 0; z < k; ++z) {
            out[z] = tu[z] * tv[z] * p.eta[z];  // S factors cancel in the ratio
            sum += out[z];
        }
        if (sum <= 0.0)
            throw EmError("e-step: zero link-mean at pair ('" + corpus.documents[edge.u].id + "', '" +
                          corpus.documents[edge.v].id + "')");
        for (std::size_t z = 0; z < k; ++z) out[z] /= sum;
    }
}

inline Responsibilities e_step(const Corpus& corpus, const ModelParams& p) {
    Responsibilities resp;
    e_step_into(corpus, p, resp);
    return resp;
}

// Events worth surfacing from an M-step; counts, not hard errors.
struct MStepFlags {
    std::size_t dead_topics = 0;          // column of theta died; eta_z forced to 0
    std::size_t uniform_theta_rows = 0;   // no usable numerator; row reset to uniform
    std::size_t uniform_beta_rows = 0;    // empty beta denominator; row reset to uniform
    std::size_t guarded_dc_updates = 0;   // degree-corrected denominators floored

    void merge(const MStepFlags& o) {
        dead_topics += o.dead_topics;
        uniform_theta_rows += o.uniform_theta_rows;
        uniform_beta_rows += o.uniform_beta_rows;
        guarded_dc_updates += o.guarded_dc_updates;
    }
    bool any() const { return dead_topics || uniform_theta_rows || uniform_beta_rows || guarded_dc_updates; }
};

namespace detail {

// Shared M-step sufficient statistics.
struct MStepStats {
    Matrix num;             // N x K: per-row numerators (content + link + pseudocounts)
    std::vector<double> a;  // K: sum over ordered pairs of A q  (= 2 sum_edges A_e q_e)
    std::vector<double> b;  // K: content column sums entering xi
};

inline MStepStats accumulate_stats(const Corpus& corpus, const Responsibilities& resp,
                                   const HyperConfig& config) {
    const std::size_t n = corpus.n_docs(), k = config.topics;
    const double alpha = config.alpha;
    MStepStats st;
    st.num = Matrix(n, k);
    st.a.assign(k, 0.0);
    st.b.assign(k, 0.0);

    std::vector<CompensatedSum> a_acc(k), b_acc(k);
    for (std::size_t d = 0; d < n; ++d) {
        const Document& doc = corpus.documents[d];
        double* num = st.num.row(d);
        if (alpha > 0.0) {
            const double content_weight =
                config.length_normalize ? alpha / double(doc.length) : alpha;
            const double b_weight = config.length_normalize ? 1.0 / double(doc.length) : 1.0;
            std::size_t row = resp.h_offset[d];
            for (const auto& [word, count] : doc.counts) {
                (void)word;
                const double* hrow = resp.h.row(row++);
                for (std::size_t z = 0; z < k; ++z) {
                    const double ch = double(count) * hrow[z];
                    num[z] += content_weight * ch;
                    b_acc[z].add(b_weight * ch);
                }
            }
        }
        if (alpha < 1.0) {
            for (const auto& [neighbor, eidx] : corpus.links.adj[d]) {
                (void)neighbor;
                const double* qrow = resp.q.row(eidx);
                const double count = double(corpus.links.edges[eidx].count);
                for (std::size_t z = 0; z < k; ++z) num[z] += (1.0 - alpha) * count * qrow[z];
            }
        }
        for (std::size_t z = 0; z < k; ++z) num[z] += config.pseudo(z);
    }
    if (alpha < 1.0) {
        for (std::size_t e = 0; e < corpus.links.edges.size(); ++e) {
            const double count = double(corpus.links.edges[e].count);
            const double* qrow = resp.q.row(e);
            for (std::size_t z = 0; z < k; ++z) a_acc[z].add(2.0 * count * qrow[z]);
        }
    }
    for (std::size_t z = 0; z < k; ++z) {
        st.a[z] = a_acc[z].value();
        st.b[z] = b_acc[z].value();
    }
    return st;
}

// Exact single-row maximizer of the M-step bound
//   sum_z num_z log theta_z - 1/2 sum_z c_z (t_excl_z + theta_z)^2
// over the simplex, where t_excl_z is the column sum excluding this row.
// Stationarity gives c_z theta^2 + (lambda + c_z t_excl_z) theta = num_z, so
//   theta_z(lambda) = 2 num_z / (B_z + sqrt(B_z^2 + 4 c_z num_z)),
// which decreases strictly in lambda; a bracketed Newton finds the root of
// sum theta_z(lambda) = 1. The form is stable as c_z -> 0 (plain num/lambda).
inline bool solve_theta_row(const double* num, const double* c, const double* t_excl, std::size_t k,
                            double* out) {
    double num_sum = 0.0;
    double lo = -std::numeric_limits<double>::infinity();
    std::size_t support = 0, only = 0;
    for (std::size_t z = 0; z < k; ++z) {
        out[z] = 0.0;
        if (num[z] > 0.0) {
            num_sum += num[z];
            // theta_z(lambda) >= 1 iff lambda <= num_z - c_z - c_z t_excl_z
            lo = std::max(lo, num[z] - c[z] - c[z] * t_excl[z]);
            ++support;
            only = z;
        }
    }
    if (support == 0) return false;
    if (support == 1) {
        out[only] = 1.0;
        return true;
    }

    auto theta_at = [&](std::size_t z, double lambda) {
        const double b = lambda + c[z] * t_excl[z];
        const double disc = std::sqrt(b * b + 4.0 * c[z] * num[z]);
        // the b < 0 branch avoids cancellation in b + disc (c_z > 0 there,
        // since with c_z = 0 the bracket keeps lambda = b positive)
        return b < 0.0 ? (disc - b) / (2.0 * c[z]) : 2.0 * num[z] / (b + disc);
    };
    double lo_b = lo, hi_b = num_sum;  // f(lo) >= 0 >= f(hi)
    if (!(hi_b > lo_b)) hi_b = lo_b + 1.0;
    double lambda = lo_b;
    double prev_abs_f = std::numeric_limits<double>::infinity();
    bool stalled = false;
    for (int it = 0; it < 200; ++it) {
        double f = -1.0, fp = 0.0;
        for (std::size_t z = 0; z < k; ++z) {
            if (num[z] <= 0.0) continue;
            const double th = theta_at(z, lambda);
            f += th;
            fp -= th / std::sqrt((lambda + c[z] * t_excl[z]) * (lambda + c[z] * t_excl[z]) +
                                 4.0 * c[z] * num[z]);
        }
        if (f > 0.0)
            lo_b = lambda;
        else
            hi_b = lambda;
        if (std::abs(f) <= 1e-13) break;  // lambda already resolves the simplex
        // a topic with num_z and c_z both near zero makes theta_z(lambda) a
        // cliff whose slope drives Newton into 1e-16-sized steps from the
        // bracket edge (steps that stay inside the bracket, so the containment
        // fallback alone never fires); force bisection whenever an iteration
        // fails to halve |f| so the bracket still shrinks geometrically
        double next = !stalled && fp < 0.0 ? lambda - f / fp : 0.5 * (lo_b + hi_b);
        if (!(next > lo_b && next < hi_b)) next = 0.5 * (lo_b + hi_b);
        stalled = std::abs(f) > 0.5 * prev_abs_f;
        prev_abs_f = std::abs(f);
        // the step test must stay relative to lambda itself: an absolute
        // floor would declare victory while crawling at the cliff's scale
        if (std::abs(next - lambda) <= 1e-15 * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    double sum = 0.0;
    for (std::size_t z = 0; z < k; ++z) {
        if (num[z] > 0.0) {
            out[z] = theta_at(z, lambda);
            sum += out[z];
        }
    }
    if (!(sum > 0.0)) return false;
    for (std::size_t z = 0; z < k; ++z) out[z] /= sum;
    return true;
}

inline void column_sums(const Matrix& theta, std::vector<double>& t) {
    t.assign(theta.cols, 0.0);
    std::vector<CompensatedSum> acc(theta.cols);
    for (std::size_t d = 0; d < theta.rows; ++d) {
        const double* row = theta.row(d);
        for (std::size_t z = 0; z < theta.cols; ++z) acc[z].add(row[z]);
    }
    for (std::size_t z = 0; z < theta.cols; ++z) t[z] = acc[z].value();
}

inline Matrix beta_update(const Corpus& corpus, const Responsibilities& resp, const HyperConfig& config,
                          MStepFlags* flags) {
    const std::size_t k = config.topics, w = corpus.n_words();
    Matrix beta(k, w);
    for (std::size_t d = 0; d < corpus.n_docs(); ++d) {
        const Document& doc = corpus.documents[d];
        const double weight = config.length_normalize ? 1.0 / double(doc.length) : 1.0;
        std::size_t row = resp.h_offset[d];
        for (const auto& [word, count] : doc.counts) {
            const double* hrow = resp.h.row(row++);
            const double wc = weight * double(count);
            for (std::size_t z = 0; z < k; ++z) beta(z, word) += wc * hrow[z];
        }
    }
    for (std::size_t z = 0; z < k; ++z) {
        double* row = beta.row(z);
        const double sum = compensated_total(row, w);
        if (sum > 0.0) {
            for (std::size_t j = 0; j < w; ++j) row[j] /= sum;
        } else {
            if (flags) ++flags->uniform_beta_rows;
            for (std::size_t j = 0; j < w; ++j) row[j] = 1.0 / double(w);
        }
    }
    return beta;
}

}  // namespace detail

inline ModelParams m_step_vanilla(const Corpus& corpus, const Responsibilities& resp,
                                  const HyperConfig& config, const ModelParams& prev,
                                  MStepFlags* flags = nullptr) {
    const std::size_t n = corpus.n_docs(), k = config.topics;
    detail::MStepStats st = detail::accumulate_stats(corpus, resp, config);

    ModelParams p;

    double max_coupling = 0.0;
    for (std::size_t z = 0; z < k; ++z)
        max_coupling = std::max(max_coupling, (1.0 - config.alpha) * prev.eta[z]);

    if (max_coupling == 0.0) {
        // alpha = 1 or eta = 0: the mass term is flat and rows decouple.
        p.theta = Matrix(n, k);
        for (std::size_t d = 0; d < n; ++d) {
            const double* num = st.num.row(d);
            double* out = p.theta.row(d);
            const double sum = compensated_total(num, k);
            if (sum > 0.0) {
                for (std::size_t z = 0; z < k; ++z) out[z] = num[z] / sum;
            } else {
                if (flags) ++flags->uniform_theta_rows;
                for (std::size_t z = 0; z < k; ++z) out[z] = 1.0 / double(k);
            }
        }
    } else {
        // Gauss-Seidel over rows: each row solve is the exact maximizer of the
        // (strictly concave) bound given the other rows, with the column sums
        // maintained incrementally, so every sweep increases the bound and the
        // loop cannot oscillate.
        std::vector<double> coupling(k);
        for (std::size_t z = 0; z < k; ++z) coupling[z] = (1.0 - config.alpha) * prev.eta[z];
        p.theta = prev.theta;  // warm start
        std::vector<double> t, t_excl(k), row(k);
        std::vector<std::uint8_t> fallback(n, 0);
        detail::column_sums(p.theta, t);
        for (int sweep = 0; sweep < 400; ++sweep) {
            double max_change = 0.0;
            for (std::size_t d = 0; d < n; ++d) {
                double* out = p.theta.row(d);
                for (std::size_t z = 0; z < k; ++z) t_excl[z] = std::max(0.0, t[z] - out[z]);
                if (detail::solve_theta_row(st.num.row(d), coupling.data(), t_excl.data(), k, row.data())) {
                    fallback[d] = 0;
                } else {
                    fallback[d] = 1;
                    for (std::size_t z = 0; z < k; ++z) row[z] = 1.0 / double(k);
                }
                for (std::size_t z = 0; z < k; ++z) {
                    max_change = std::max(max_change, std::abs(row[z] - out[z]));
                    t[z] = t_excl[z] + row[z];
                    out[z] = row[z];
                }
            }
            if (max_change < 1e-13) break;
            if ((sweep & 15) == 15) detail::column_sums(p.theta, t);  // shed incremental drift
        }
        if (flags)
            for (std::size_t d = 0; d < n; ++d) flags->uniform_theta_rows += fallback[d];
    }

    p.beta = config.alpha > 0.0 ? detail::beta_update(corpus, resp, config, flags) : prev.beta;

    if (config.alpha < 1.0) {
        std::vector<double> t;
        detail::column_sums(p.theta, t);
        p.eta.assign(k, 0.0);
        for (std::size_t z = 0; z < k; ++z) {
            if (t[z] > 0.0) {
                p.eta[z] = st.a[z] / (t[z] * t[z]);
            } else {
                p.eta[z] = 0.0;
                if (flags) ++flags->dead_topics;
            }
        }
    } else {
        p.eta = prev.eta;  // links carry no weight; leave their parameters alone
    }
    p.s = prev.s;
    return p;
}

// Mutually dependent degree-corrected work variables, warm-started across
// outer iterations.
struct DcWork {
    std::vector<double> xi;
    std::vector<double> eta_plus_xi;
    bool initialized = false;
    std::size_t inner_sweeps = 5;  // per M-step; early-stopped at 1e-10 max change
};

namespace detail {

inline void compute_xi(const Corpus& corpus, const HyperConfig& config, const MStepStats& st,
                       const Matrix& theta, std::vector<double>& xi) {
    const std::size_t k = config.topics, n = corpus.n_docs();
    xi.assign(k, 0.0);
    const double alpha = config.alpha;
    if (alpha > 0.0) {
        // b already carries the 1/L_d weights when normalizing, so the matching
        // theta sum is plain (normalized) or length-weighted (unnormalized).
        std::vector<CompensatedSum> tsum(k);
        for (std::size_t d = 0; d < n; ++d) {
            const double w = config.length_normalize ? 1.0 : double(corpus.documents[d].length);
            const double* row = theta.row(d);
            for (std::size_t z = 0; z < k; ++z) tsum[z].add(w * row[z]);
        }
        for (std::size_t z = 0; z < k; ++z) xi[z] = alpha / (1.0 - alpha) * (st.b[z] - tsum[z].value());
    }
    if (config.has_prior()) {
        std::vector<double> t;
        column_sums(theta, t);
        const double t_total = config.pseudo_total();
        for (std::size_t z = 0; z < k; ++z)
            xi[z] += (double(n) * config.pseudo(z) - t[z] * t_total) / (1.0 - alpha);
    }
}

}  // namespace detail

inline ModelParams m_step_dc(const Corpus& corpus, const Responsibilities& resp,
                             const ModelParams& prev, const HyperConfig& config, DcWork& work,
                             MStepFlags* flags = nullptr) {
    if (!config.degree_corrected) throw std::invalid_argument("m_step_dc: config is not degree-corrected");
    if (config.alpha >= 1.0)
        throw std::invalid_argument("m_step_dc: alpha = 1 has no link term; use the vanilla step");
    const std::size_t n = corpus.n_docs(), k = config.topics;
    detail::MStepStats st = detail::accumulate_stats(corpus, resp, config);

    ModelParams p;
    p.eta = st.a;  // sum_z eta_z = 2M by construction
    p.theta = prev.theta;
    p.s = prev.s;
    if (!work.initialized || work.xi.size() != k) {
        detail::compute_xi(corpus, config, st, p.theta, work.xi);
        work.initialized = true;
    }

    const double t_total = config.pseudo_total();
    const double denom_floor = 1e-300;
    std::vector<double> denom(k);
    Matrix theta_new(n, k);
    for (std::size_t sweep = 0; sweep < work.inner_sweeps; ++sweep) {
        double max_change = 0.0;
        double xi_scale = 1.0, s_scale = 1e-9;
        for (std::size_t z = 0; z < k; ++z) xi_scale = std::max(xi_scale, std::abs(work.xi[z]));
        for (std::size_t d = 0; d < n; ++d) s_scale = std::max(s_scale, p.s[d]);

        for (std::size_t d = 0; d < n; ++d) {
            const double lambda_d =
                config.length_normalize ? config.alpha : config.alpha * double(corpus.documents[d].length);
            const double* num = st.num.row(d);
            double* out = theta_new.row(d);
            double num_sum = 0.0;
            for (std::size_t z = 0; z < k; ++z) num_sum += num[z];
            if (!(num_sum > 0.0)) {  // no content weight, no links, no prior
                if (flags && sweep == 0) ++flags->uniform_theta_rows;
                for (std::size_t z = 0; z < k; ++z) out[z] = 1.0 / double(k);
            } else {
                double sum = 0.0;
                bool guarded = false;
                for (std::size_t z = 0; z < k; ++z) {
                    double den = lambda_d + (1.0 - config.alpha) * (p.eta[z] + work.xi[z]) * p.s[d] + t_total;
                    if (!(den > denom_floor)) {
                        den = denom_floor;
                        guarded = true;
                    }
                    out[z] = num[z] / den;
                    sum += out[z];
                }
                if (guarded && flags) ++flags->guarded_dc_updates;
                for (std::size_t z = 0; z < k; ++z) out[z] /= sum;
            }
            for (std::size_t z = 0; z < k; ++z)
                max_change = std::max(max_change, std::abs(out[z] - p.theta(d, z)));
        }
        std::swap(p.theta.a, theta_new.a);

        std::vector<double> xi_new;
        detail::compute_xi(corpus, config, st, p.theta, xi_new);
        for (std::size_t z = 0; z < k; ++z)
            max_change = std::max(max_change, std::abs(xi_new[z] - work.xi[z]) / xi_scale);
        work.xi = std::move(xi_new);

        for (std::size_t d = 0; d < n; ++d) {
            const double kappa = double(corpus.links.degree[d]);
            double s_new = 0.0;
            if (kappa > 0.0) {
                double u = 0.0;
                const double* row = p.theta.row(d);
                for (std::size_t z = 0; z < k; ++z) u += (p.eta[z] + work.xi[z]) * row[z];
                if (!(u > 0.0)) {
                    // xi is a constraint multiplier and can transiently push the
                    // denominator negative early in the sweep; keep the previous
                    // propensity rather than exploding it (a converged state with
                    // kappa > 0 always has u > 0, so fixed points are unaffected)
                    if (flags) ++flags->guarded_dc_updates;
                    continue;
                }
                s_new = kappa / u;
            }
            max_change = std::max(max_change, std::abs(s_new - p.s[d]) / s_scale);
            p.s[d] = s_new;
        }
        if (max_change < 1e-10) break;
    }

    work.eta_plus_xi.assign(k, 0.0);
    for (std::size_t z = 0; z < k; ++z) work.eta_plus_xi[z] = p.eta[z] + work.xi[z];
    p.beta = config.alpha > 0.0 ? detail::beta_update(corpus, resp, config, flags) : prev.beta;
    return p;
}

struct FitReport {
    std::vector<double> objective_trace;  // winning chain: initial L, then one entry per iteration
    std::size_t iterations = 0;
    bool converged = false;
    double wall_time = 0.0;
    std::size_t restart_index = 0;
    double objective = -std::numeric_limits<double>::infinity();
    std::vector<double> restart_objectives;   // final L per restart (-inf for failed chains)
    std::vector<std::string> restart_errors;  // non-empty where a chain aborted
    MStepFlags flags;
};

struct FitOptions {
    std::size_t restarts = 1;
    std::size_t jobs = 1;
    std::size_t dc_inner_sweeps = 5;
    std::size_t checkpoint_every = 0;  // 0 = off; periodic checkpoints only for single-restart runs
    std::string checkpoint_path;
};

struct ChainResult {
    ModelParams params;
    std::vector<double> trace;
    std::size_t iterations = 0;
    std::size_t restart_index = 0;
    bool converged = false;
    double objective = -std::numeric_limits<double>::infinity();
    std::string error;
    MStepFlags flags;
};

namespace detail {

inline void clamp_theta(Matrix& theta, double threshold, MStepFlags* flags) {
    for (std::size_t d = 0; d < theta.rows; ++d) {
        double* row = theta.row(d);
        double sum = 0.0;
        for (std::size_t z = 0; z < theta.cols; ++z) {
            if (row[z] < threshold) row[z] = 0.0;
            sum += row[z];
        }
        if (sum > 0.0) {
            for (std::size_t z = 0; z < theta.cols; ++z) row[z] /= sum;
        } else {
            if (flags) ++flags->uniform_theta_rows;
            for (std::size_t z = 0; z < theta.cols; ++z) row[z] = 1.0 / double(theta.cols);
        }
    }
}

inline ChainResult run_chain(const Corpus& corpus, const HyperConfig& config, const FitOptions& options,
                             std::size_t restart_index) {
    ChainResult res;
    res.restart_index = restart_index;
    try {
        Rng rng(fork_seed(config.seed, restart_index));
        ModelParams params = init_random(corpus, config, rng);
        DcWork dc;
        dc.inner_sweeps = options.dc_inner_sweeps;
        double objective = log_likelihood(corpus, params, config);
        res.trace.push_back(objective);

        Responsibilities resp;
        const bool use_dc = config.degree_corrected && config.alpha < 1.0;
        for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
            e_step_into(corpus, params, resp, /*skip_content=*/config.alpha == 0.0,
                        /*skip_links=*/config.alpha == 1.0);
            params = use_dc ? m_step_dc(corpus, resp, params, config, dc, &res.flags)
                            : m_step_vanilla(corpus, resp, config, params, &res.flags);
            if (config.theta_zero_threshold > 0.0)
                clamp_theta(params.theta, config.theta_zero_threshold, &res.flags);
            const double next = log_likelihood(corpus, params, config);
            res.trace.push_back(next);
            ++res.iterations;
            if (options.checkpoint_every > 0 && !options.checkpoint_path.empty() &&
                (iter + 1) % options.checkpoint_every == 0)
                save_model(params, options.checkpoint_path);
            if (std::isinf(next) && next < 0.0) break;  // degenerate; chain is worthless
            const double denom = std::max(std::abs(objective), 1e-12);
            if (std::abs(next - objective) / denom < config.rel_tol) {
                objective = next;
                res.converged = true;
                break;
            }
            objective = next;
        }
        res.objective = res.trace.back();
        res.params = std::move(params);
    } catch (const EmError& e) {
        res.error = e.what();
        res.objective = -std::numeric_limits<double>::infinity();
    }
    return res;
}

}  // namespace detail

// Runs every restart chain (each seeded by forking the configured seed with
// its restart index) and returns all of them, failed ones included.
inline std::vector<ChainResult> run_restart_chains(const Corpus& corpus, const HyperConfig& config,
                                                   const FitOptions& options) {
    config.validate();
    if (options.restarts < 1) throw std::invalid_argument("fit: restarts must be >= 1");
    std::vector<ChainResult> results(options.restarts);
    FitOptions chain_options = options;
    if (options.restarts > 1) chain_options.checkpoint_every = 0;  // periodic checkpoints only make sense for one chain

    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, options.restarts));
    if (jobs == 1) {
        for (std::size_t r = 0; r < options.restarts; ++r)
            results[r] = detail::run_chain(corpus, config, chain_options, r);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t r = next.fetch_add(1);
                if (r >= options.restarts) return;
                results[r] = detail::run_chain(corpus, config, chain_options, r);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

// Winner: highest finite objective; the first such restart on ties, which
// keeps the choice independent of the job count.
inline std::size_t best_chain(const std::vector<ChainResult>& results) {
    std::size_t best = results.size();
    for (std::size_t r = 0; r < results.size(); ++r) {
        const auto& res = results[r];
        if (res.error.empty() && std::isfinite(res.objective))
            if (best == results.size() || res.objective > results[best].objective) best = r;
    }
    if (best == results.size()) throw EmError("fit: no valid fit (all restart chains failed)");
    return best;
}

inline FitReport summarize_chains(const std::vector<ChainResult>& results, std::size_t best) {
    FitReport report;
    report.restart_objectives.reserve(results.size());
    report.restart_errors.assign(results.size(), "");
    for (std::size_t r = 0; r < results.size(); ++r) {
        report.restart_objectives.push_back(results[r].objective);
        report.restart_errors[r] = results[r].error;
        report.flags.merge(results[r].flags);
    }
    const ChainResult& win = results[best];
    report.objective_trace = win.trace;
    report.iterations = win.iterations;
    report.converged = win.converged;
    report.restart_index = best;
    report.objective = win.objective;
    return report;
}

inline std::pair<ModelParams, FitReport> fit_ex(const Corpus& corpus, const HyperConfig& config,
                                                const FitOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<ChainResult> results = run_restart_chains(corpus, config, options);
    const std::size_t best = best_chain(results);
    FitReport report = summarize_chains(results, best);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (options.checkpoint_every > 0 && !options.checkpoint_path.empty())
        save_model(results[best].params, options.checkpoint_path);
    return {std::move(results[best].params), std::move(report)};
}

inline std::pair<ModelParams, FitReport> fit(const Corpus& corpus, const HyperConfig& config,
                                             std::size_t restarts = 1) {
    FitOptions options;
    options.restarts = restarts;
    return fit_ex(corpus, config, options);
}

}  // namespace mixtopic
