#pragma once

// Shared builders for the test suite: in-memory corpora, random instances,
// and throwaway directories for the file-format and CLI tests.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <mixtopic/corpus.hpp>
#include <mixtopic/rng.hpp>

namespace testutil {

using mixtopic::Corpus;
using mixtopic::Document;
using mixtopic::Edge;
using mixtopic::Rng;

inline Document doc(std::string id, std::vector<std::pair<std::uint32_t, std::uint32_t>> counts) {
    Document d;
    d.id = std::move(id);
    d.counts = std::move(counts);
    d.length = 0;
    for (auto [w, c] : d.counts) d.length += c;
    return d;
}

// words w0..w{n_words-1}; edges as (u, v, count) triples
inline Corpus make_corpus(std::size_t n_words, std::vector<Document> docs,
                          const std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>>& edges = {}) {
    Corpus c;
    for (std::size_t j = 0; j < n_words; ++j) c.vocabulary.add("w" + std::to_string(j));
    c.documents = std::move(docs);
    std::vector<Edge> es;
    for (auto [u, v, cnt] : edges) es.push_back(Edge{u, v, cnt});
    c.links = mixtopic::make_link_graph(c.documents.size(), std::move(es));
    mixtopic::validate_corpus(c);
    return c;
}

// Random connected-ish corpus for property tests: every document keeps at
// least one word; link counts occasionally exceed 1 to exercise multigraphs.
inline Corpus random_corpus(Rng& rng, std::size_t max_docs = 20, std::size_t max_words = 12,
                            double edge_prob = 0.25, std::uint32_t max_count = 3) {
    const std::size_t n = 2 + std::size_t(rng.next_below(max_docs - 1));
    const std::size_t w = 2 + std::size_t(rng.next_below(max_words - 1));
    std::vector<Document> docs;
    for (std::size_t d = 0; d < n; ++d) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;
        for (std::uint32_t j = 0; j < w; ++j)
            if (rng.next_double() < 0.4)
                counts.emplace_back(j, 1 + std::uint32_t(rng.next_below(max_count)));
        if (counts.empty()) counts.emplace_back(std::uint32_t(rng.next_below(w)), 1);
        docs.push_back(doc("d" + std::to_string(d), std::move(counts)));
    }
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t u = 0; u < n; ++u)
        for (std::uint32_t v = u + 1; v < n; ++v)
            if (rng.next_double() < edge_prob)
                edges.emplace_back(u, v, 1 + std::uint32_t(rng.next_below(2)));
    return make_corpus(w, std::move(docs), edges);
}

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "mixtopic_test_XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name, const std::string& content) const {
        const std::string p = (path / name).string();
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p;
    }
    std::string join(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

}  // namespace testutil
