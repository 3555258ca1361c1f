#pragma once

// Document-network container and loaders: sparse per-document word counts,
// an undirected link multigraph, label mapping, and validation. Corpora are
// immutable after construction and shared read-only across workers.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mixtopic {

struct CorpusError : std::runtime_error {
    explicit CorpusError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vocabulary {
    std::vector<std::string> words;
    std::unordered_map<std::string, std::uint32_t> index;

    std::uint32_t add(const std::string& w) {
        auto it = index.find(w);
        if (it != index.end()) return it->second;
        std::uint32_t id = std::uint32_t(words.size());
        words.push_back(w);
        index.emplace(w, id);
        return id;
    }
    std::size_t size() const { return words.size(); }
    bool operator==(const Vocabulary& o) const { return words == o.words; }
};

struct Document {
    std::string id;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;  // (word id, count), sorted, counts > 0
    long long length = 0;                                         // L_d
    int true_label = -1;                                          // -1 = unlabeled

    std::size_t distinct() const { return counts.size(); }  // R_d
    bool operator==(const Document& o) const {
        return id == o.id && counts == o.counts && length == o.length && true_label == o.true_label;
    }
};

struct Edge {
    std::uint32_t u, v;   // u < v
    std::uint32_t count;  // multigraph multiplicity

    bool operator==(const Edge& o) const { return u == o.u && v == o.v && count == o.count; }
};

struct LinkGraph {
    std::vector<Edge> edges;                                              // sorted by (u, v)
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> adj;  // per doc: (neighbor, edge index)
    std::vector<long long> degree;                                        // kappa_d with multiplicity
    long long total_links = 0;                                            // M

    bool operator==(const LinkGraph& o) const { return edges == o.edges; }
};

struct Corpus {
    Vocabulary vocabulary;
    std::vector<Document> documents;
    LinkGraph links;
    std::vector<std::string> label_names;  // empty when labels are raw integers or absent
    long long self_links_dropped = 0;

    std::size_t n_docs() const { return documents.size(); }
    std::size_t n_words() const { return vocabulary.size(); }
    long long n_links() const { return links.total_links; }  // M
    long long total_distinct() const {                       // R
        long long r = 0;
        for (const auto& d : documents) r += (long long)d.distinct();
        return r;
    }
    long long total_length() const {
        long long l = 0;
        for (const auto& d : documents) l += d.length;
        return l;
    }

    bool operator==(const Corpus& o) const {
        return vocabulary == o.vocabulary && documents == o.documents && links == o.links &&
               label_names == o.label_names;
    }
};

// Build the symmetric multigraph from (u, v, multiplicity) triples with u < v.
// Triples must be unique per pair; use accumulate_links to get here from raw pairs.
inline LinkGraph make_link_graph(std::size_t n_docs, std::vector<Edge> edges) {
    for (const auto& e : edges) {
        if (e.u >= e.v) throw CorpusError("make_link_graph: edge endpoints must satisfy u < v");
        if (e.v >= n_docs) throw CorpusError("make_link_graph: edge endpoint out of range");
        if (e.count == 0) throw CorpusError("make_link_graph: zero-multiplicity edge");
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v)
            throw CorpusError("make_link_graph: duplicate edge for one pair");
    LinkGraph g;
    g.edges = std::move(edges);
    g.adj.assign(n_docs, {});
    g.degree.assign(n_docs, 0);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const Edge& e = g.edges[i];
        g.adj[e.u].emplace_back(e.v, std::uint32_t(i));
        g.adj[e.v].emplace_back(e.u, std::uint32_t(i));
        g.degree[e.u] += e.count;
        g.degree[e.v] += e.count;
        g.total_links += e.count;
    }
    return g;
}

// Fold raw (possibly directed, possibly repeated) pairs into unique undirected
// edges. Self-pairs are dropped and counted. binarize collapses any multiplicity
// to a single link.
inline LinkGraph accumulate_links(std::size_t n_docs,
                                  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& raw,
                                  bool binarize, long long* self_dropped) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> acc;
    long long dropped = 0;
    for (auto [a, b] : raw) {
        if (a == b) {
            ++dropped;
            continue;
        }
        if (a > b) std::swap(a, b);
        acc[{a, b}] += 1;
    }
    std::vector<Edge> edges;
    edges.reserve(acc.size());
    for (const auto& [pair, count] : acc)
        edges.push_back(Edge{pair.first, pair.second, binarize ? 1u : count});
    if (self_dropped) *self_dropped = dropped;
    return make_link_graph(n_docs, std::move(edges));
}

inline void validate_corpus(const Corpus& c) {
    const std::size_t w = c.n_words();
    for (const auto& d : c.documents) {
        if (d.length <= 0) throw CorpusError("document '" + d.id + "' has zero length");
        long long sum = 0;
        std::uint32_t prev_word = 0;
        bool first = true;
        for (const auto& [word, count] : d.counts) {
            if (word >= w) throw CorpusError("document '" + d.id + "' references word id out of range");
            if (count == 0) throw CorpusError("document '" + d.id + "' stores a zero count");
            if (!first && word <= prev_word) throw CorpusError("document '" + d.id + "' counts not sorted");
            prev_word = word;
            first = false;
            sum += count;
        }
        if (sum != d.length) throw CorpusError("document '" + d.id + "' length mismatch");
    }
    long long degree_sum = 0;
    for (long long k : c.links.degree) degree_sum += k;
    if (degree_sum != 2 * c.n_links()) throw CorpusError("degree sum does not equal 2M");
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline bool parse_u64(const std::string& s, std::uint64_t& out) {
    if (s.empty()) return false;
    std::uint64_t v = 0;
    for (char ch : s) {
        if (ch < '0' || ch > '9') return false;
        v = v * 10 + std::uint64_t(ch - '0');
    }
    out = v;
    return true;
}

}  // namespace detail

// LINQS-style loader. content lines: `id f_1 ... f_W label` (dense integer
// features) or `id word:count ... [label]` (sparse). cites lines: `cited citing`.
// Citations are symmetrized; binarize clamps word counts to 0/1 and collapses
// duplicate/reciprocal citations to simple links.
inline Corpus load_linqs(const std::string& content_path, const std::string& cites_path,
                         bool binarize = false) {
    std::ifstream content(content_path);
    if (!content) throw CorpusError("cannot open content file: " + content_path);

    Corpus c;
    std::unordered_map<std::string, std::uint32_t> doc_index;
    std::unordered_map<std::string, int> label_ids;
    std::size_t dense_w = 0;
    bool saw_dense = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(content, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto toks = detail::split_ws(line);
        if (toks.size() < 2)
            throw CorpusError(content_path + ":" + std::to_string(line_no) + ": malformed line (too few fields)");
        Document doc;
        doc.id = toks[0];
        if (doc_index.count(doc.id))
            throw CorpusError(content_path + ":" + std::to_string(line_no) + ": duplicate document id '" + doc.id + "'");

        bool sparse = false;
        for (std::size_t i = 1; i < toks.size(); ++i)
            if (toks[i].find(':') != std::string::npos) {
                sparse = true;
                break;
            }

        std::string label_tok;
        if (sparse) {
            std::map<std::uint32_t, std::uint64_t> acc;
            for (std::size_t i = 1; i < toks.size(); ++i) {
                auto colon = toks[i].find(':');
                if (colon == std::string::npos) {
                    if (i + 1 != toks.size())
                        throw CorpusError(content_path + ":" + std::to_string(line_no) +
                                          ": malformed line (label must be the last field)");
                    label_tok = toks[i];
                    break;
                }
                std::string word = toks[i].substr(0, colon);
                std::uint64_t count = 0;
                if (word.empty() || !detail::parse_u64(toks[i].substr(colon + 1), count))
                    throw CorpusError(content_path + ":" + std::to_string(line_no) +
                                      ": malformed sparse count '" + toks[i] + "'");
                if (count == 0) continue;
                acc[c.vocabulary.add(word)] += count;
            }
            for (auto [word, count] : acc) {
                std::uint32_t stored = binarize ? 1u : std::uint32_t(std::min<std::uint64_t>(count, 0xffffffffULL));
                doc.counts.emplace_back(word, stored);
                doc.length += stored;
            }
        } else {
            if (!saw_dense) {
                if (toks.size() < 3)
                    throw CorpusError(content_path + ":" + std::to_string(line_no) +
                                      ": malformed line (expected id, features, label)");
                dense_w = toks.size() - 2;
                saw_dense = true;
                for (std::size_t wid = 0; wid < dense_w; ++wid) c.vocabulary.add("w" + std::to_string(wid));
            }
            if (toks.size() != dense_w + 2)
                throw CorpusError(content_path + ":" + std::to_string(line_no) + ": malformed line (expected " +
                                  std::to_string(dense_w + 2) + " fields, got " + std::to_string(toks.size()) + ")");
            for (std::size_t wid = 0; wid < dense_w; ++wid) {
                std::uint64_t v = 0;
                if (!detail::parse_u64(toks[1 + wid], v))
                    throw CorpusError(content_path + ":" + std::to_string(line_no) +
                                      ": malformed feature value '" + toks[1 + wid] + "'");
                if (v == 0) continue;
                std::uint32_t stored = binarize ? 1u : std::uint32_t(std::min<std::uint64_t>(v, 0xffffffffULL));
                doc.counts.emplace_back(std::uint32_t(wid), stored);
                doc.length += stored;
            }
            label_tok = toks.back();
        }

        if (!label_tok.empty()) {
            auto it = label_ids.find(label_tok);
            if (it == label_ids.end()) {
                it = label_ids.emplace(label_tok, int(c.label_names.size())).first;
                c.label_names.push_back(label_tok);
            }
            doc.true_label = it->second;
        }
        if (doc.length == 0)
            throw CorpusError(content_path + ":" + std::to_string(line_no) + ": document '" + doc.id +
                              "' has no word occurrences" + (binarize ? " after binarization" : ""));
        doc_index.emplace(doc.id, std::uint32_t(c.documents.size()));
        c.documents.push_back(std::move(doc));
    }
    if (c.documents.empty()) throw CorpusError(content_path + ": no documents");

    std::ifstream cites(cites_path);
    if (!cites) throw CorpusError("cannot open cites file: " + cites_path);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> raw;
    std::vector<std::string> unknown;
    line_no = 0;
    while (std::getline(cites, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto toks = detail::split_ws(line);
        if (toks.size() != 2)
            throw CorpusError(cites_path + ":" + std::to_string(line_no) + ": malformed line (expected 2 fields)");
        auto lookup = [&](const std::string& id) -> std::int64_t {
            auto it = doc_index.find(id);
            if (it == doc_index.end()) {
                if (std::find(unknown.begin(), unknown.end(), id) == unknown.end()) unknown.push_back(id);
                return -1;
            }
            return it->second;
        };
        std::int64_t a = lookup(toks[0]), b = lookup(toks[1]);
        if (a >= 0 && b >= 0) raw.emplace_back(std::uint32_t(a), std::uint32_t(b));
    }
    if (!unknown.empty()) {
        std::string msg = cites_path + ": citations reference documents with no content row:";
        for (const auto& id : unknown) msg += " '" + id + "'";
        throw CorpusError(msg);
    }
    c.links = accumulate_links(c.documents.size(), raw, binarize, &c.self_links_dropped);
    validate_corpus(c);
    return c;
}

// Canonical JSON corpus. Schema errors carry a JSON pointer to the offending field.
inline Corpus load_canonical_json(const nlohmann::json& root) {
    using nlohmann::json;
    auto fail = [](const std::string& ptr, const std::string& what) {
        throw CorpusError("corpus schema: " + ptr + ": " + what);
    };
    if (!root.is_object()) fail("", "expected an object");

    Corpus c;
    if (!root.contains("vocabulary") || !root["vocabulary"].is_array()) fail("/vocabulary", "expected an array");
    {
        std::size_t i = 0;
        for (const auto& w : root["vocabulary"]) {
            if (!w.is_string()) fail("/vocabulary/" + std::to_string(i), "expected a string");
            const std::string word = w.get<std::string>();
            if (c.vocabulary.index.count(word)) fail("/vocabulary/" + std::to_string(i), "duplicate word '" + word + "'");
            c.vocabulary.add(word);
            ++i;
        }
    }

    if (!root.contains("documents") || !root["documents"].is_array()) fail("/documents", "expected an array");
    if (root["documents"].empty()) fail("/documents", "no documents");
    std::unordered_map<std::string, std::uint32_t> doc_index;
    std::unordered_map<std::string, int> label_ids;
    bool labels_int = false, labels_str = false;
    std::size_t di = 0;
    for (const auto& jd : root["documents"]) {
        const std::string ptr = "/documents/" + std::to_string(di);
        if (!jd.is_object()) fail(ptr, "expected an object");
        if (!jd.contains("id") || !jd["id"].is_string()) fail(ptr + "/id", "expected a string");
        Document doc;
        doc.id = jd["id"].get<std::string>();
        if (doc_index.count(doc.id)) fail(ptr + "/id", "duplicate document id '" + doc.id + "'");
        if (!jd.contains("counts") || !jd["counts"].is_object()) fail(ptr + "/counts", "expected an object");
        std::map<std::uint32_t, std::uint64_t> acc;
        for (const auto& [word, value] : jd["counts"].items()) {
            const std::string cptr = ptr + "/counts/" + word;
            auto it = c.vocabulary.index.find(word);
            if (it == c.vocabulary.index.end()) fail(cptr, "word not in vocabulary");
            if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
                fail(cptr, "expected a non-negative integer count");
            std::uint64_t v = value.get<std::uint64_t>();
            if (v > 0) acc[it->second] += v;
        }
        for (auto [word, count] : acc) {
            doc.counts.emplace_back(word, std::uint32_t(std::min<std::uint64_t>(count, 0xffffffffULL)));
            doc.length += doc.counts.back().second;
        }
        if (jd.contains("label")) {
            const auto& jl = jd["label"];
            if (jl.is_string()) {
                labels_str = true;
                const std::string name = jl.get<std::string>();
                auto it = label_ids.find(name);
                if (it == label_ids.end()) {
                    it = label_ids.emplace(name, int(c.label_names.size())).first;
                    c.label_names.push_back(name);
                }
                doc.true_label = it->second;
            } else if (jl.is_number_integer() && jl.get<std::int64_t>() >= 0) {
                labels_int = true;
                doc.true_label = int(jl.get<std::int64_t>());
            } else {
                fail(ptr + "/label", "expected a string or a non-negative integer");
            }
            if (labels_int && labels_str) fail(ptr + "/label", "mixed string and integer labels");
        }
        if (doc.length == 0) fail(ptr, "document '" + doc.id + "' has no word occurrences");
        doc_index.emplace(doc.id, std::uint32_t(c.documents.size()));
        c.documents.push_back(std::move(doc));
        ++di;
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> raw;
    if (root.contains("links")) {
        if (!root["links"].is_array()) fail("/links", "expected an array");
        std::size_t li = 0;
        for (const auto& jl : root["links"]) {
            const std::string ptr = "/links/" + std::to_string(li);
            if (!jl.is_array() || jl.size() != 2) fail(ptr, "expected a pair of document ids");
            std::uint32_t ends[2];
            for (int side = 0; side < 2; ++side) {
                if (!jl[side].is_string()) fail(ptr + "/" + std::to_string(side), "expected a document id string");
                auto it = doc_index.find(jl[side].get<std::string>());
                if (it == doc_index.end())
                    fail(ptr + "/" + std::to_string(side), "unknown document id '" + jl[side].get<std::string>() + "'");
                ends[side] = it->second;
            }
            raw.emplace_back(ends[0], ends[1]);
            ++li;
        }
    }
    c.links = accumulate_links(c.documents.size(), raw, /*binarize=*/false, &c.self_links_dropped);
    validate_corpus(c);
    return c;
}

inline Corpus load_canonical(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file: " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw CorpusError(path + ": JSON parse error: " + e.what());
    }
    return load_canonical_json(root);
}

inline nlohmann::json export_canonical_json(const Corpus& c) {
    nlohmann::json root;
    root["vocabulary"] = c.vocabulary.words;
    auto& docs = root["documents"] = nlohmann::json::array();
    for (const auto& d : c.documents) {
        nlohmann::json jd;
        jd["id"] = d.id;
        nlohmann::json counts = nlohmann::json::object();
        for (const auto& [word, count] : d.counts) counts[c.vocabulary.words[word]] = count;
        jd["counts"] = std::move(counts);
        if (d.true_label >= 0) {
            if (!c.label_names.empty())
                jd["label"] = c.label_names[std::size_t(d.true_label)];
            else
                jd["label"] = d.true_label;
        }
        docs.push_back(std::move(jd));
    }
    auto& links = root["links"] = nlohmann::json::array();
    for (const auto& e : c.links.edges)
        for (std::uint32_t i = 0; i < e.count; ++i)
            links.push_back({c.documents[e.u].id, c.documents[e.v].id});
    return root;
}

inline void export_canonical(const Corpus& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot write corpus file: " + path);
    out << export_canonical_json(c).dump(2) << "\n";
}

// Clamp every nonzero count to 1 and recompute lengths. Idempotent.
inline Corpus binarize_counts(const Corpus& corpus) {
    Corpus out = corpus;
    for (auto& d : out.documents) {
        for (auto& wc : d.counts) wc.second = 1;
        d.length = (long long)d.counts.size();
    }
    validate_corpus(out);
    return out;
}

}  // namespace mixtopic
