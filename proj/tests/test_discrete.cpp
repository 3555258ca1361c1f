#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <mixtopic/discrete.hpp>
#include <mixtopic/eval.hpp>
#include <mixtopic/generator.hpp>

#include "helpers.hpp"

using namespace mixtopic;
using Catch::Approx;

namespace {

HyperConfig discrete_config(std::size_t k, double alpha, bool normalize = true) {
    HyperConfig c;
    c.topics = k;
    c.alpha = alpha;
    c.length_normalize = normalize;
    return c;
}

std::vector<int> random_labels(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<int> labels(n);
    for (auto& l : labels) l = int(rng.next_below(k));
    return labels;
}

}  // namespace

TEST_CASE("harden takes the argmax with low-index ties") {
    Matrix theta(2, 3);
    theta(0, 0) = 0.2;
    theta(0, 1) = 0.7;
    theta(0, 2) = 0.1;
    theta(1, 0) = 0.5;
    theta(1, 1) = 0.5;
    theta(1, 2) = 0.0;
    REQUIRE(harden(theta) == std::vector<int>{1, 0});
}

TEST_CASE("hard labels survive a harden round trip") {
    const std::vector<int> labels{2, 0, 1, 1};
    Matrix theta(4, 3);
    for (std::size_t d = 0; d < 4; ++d) theta(d, std::size_t(labels[d])) = 1.0;
    REQUIRE(harden(theta) == labels);
}

TEST_CASE("discrete statistics count documents, words, and links") {
    Corpus c = testutil::make_corpus(
        3,
        {testutil::doc("a", {{0, 2}, {1, 1}}), testutil::doc("b", {{1, 3}}), testutil::doc("c", {{2, 1}})},
        {{0, 1, 1}, {1, 2, 2}});
    DiscreteState st = build_discrete_state(c, {0, 1, 1}, 2);

    REQUIRE(st.n == std::vector<long long>{1, 2});
    REQUIRE(st.l_tot == std::vector<long long>{3, 4});
    REQUIRE(st.c_at(0, 0, 3) == 2);
    REQUIRE(st.c_at(1, 1, 3) == 3);
    REQUIRE(st.c_at(1, 2, 3) == 1);
    // cross-edge once on each side, within-edge doubled on the diagonal
    REQUIRE(st.m == std::vector<long long>{0, 1, 1, 4});

    long long msum = 0;
    for (long long v : st.m) msum += v;
    REQUIRE(msum == 2 * c.n_links());

    REQUIRE_THROWS_AS(build_discrete_state(c, {0, 1}, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(build_discrete_state(c, {0, 1, 5}, 2), std::invalid_argument);
}

TEST_CASE("one cross link between singleton groups scores zero") {
    Corpus c = testutil::make_corpus(2, {testutil::doc("a", {{0, 1}}), testutil::doc("b", {{1, 1}})},
                                     {{0, 1, 1}});
    DiscreteState st = build_discrete_state(c, {0, 1}, 2);
    REQUIRE(st.m == std::vector<long long>{0, 1, 1, 0});
    REQUIRE(discrete_log_likelihood(c, st, discrete_config(2, 0.0)) == Approx(0.0).margin(1e-14));
}

TEST_CASE("single-cluster content likelihood has a closed form") {
    Corpus c = testutil::make_corpus(2, {testutil::doc("a", {{0, 2}}), testutil::doc("b", {{0, 1}, {1, 1}})});
    DiscreteState st = build_discrete_state(c, {0, 0}, 1);
    // aggregated counts C = (3, 1) over total length 4
    const double expect = 3.0 * std::log(3.0 / 4.0) + 1.0 * std::log(1.0 / 4.0);
    REQUIRE(discrete_log_likelihood(c, st, discrete_config(1, 1.0, /*normalize=*/false)) ==
            Approx(expect).epsilon(1e-12));
}

TEST_CASE("an unused topic contributes nothing") {
    Rng rng(19);
    Corpus c = testutil::random_corpus(rng);
    std::vector<int> labels = random_labels(rng, c.n_docs(), 2);
    DiscreteState two = build_discrete_state(c, labels, 2);
    DiscreteState three = build_discrete_state(c, labels, 3);
    for (double alpha : {0.0, 0.5, 1.0}) {
        REQUIRE(discrete_log_likelihood(c, three, discrete_config(3, alpha)) ==
                Approx(discrete_log_likelihood(c, two, discrete_config(2, alpha))).margin(1e-12));
    }
}

TEST_CASE("move deltas match a full rebuild") {
    Rng rng(101);
    int moves = 0;
    while (moves < 1000) {
        Corpus c = testutil::random_corpus(rng, 16, 10, 0.4);
        const std::size_t k = 2 + rng.next_below(3);
        std::vector<int> labels = random_labels(rng, c.n_docs(), k);
        DiscreteState st = build_discrete_state(c, labels, k);
        HyperConfig config = discrete_config(k, rng.next_double(), rng.next_below(2) == 0);
        const double base = discrete_log_likelihood(c, st, config);

        for (int i = 0; i < 25 && moves < 1000; ++i, ++moves) {
            const std::size_t d = rng.next_below(c.n_docs());
            int target = int(rng.next_below(k));
            if (target == labels[d]) target = (target + 1) % int(k);

            const double delta = move_delta(st, c, config, d, target);

            std::vector<int> moved = labels;
            moved[d] = target;
            DiscreteState rebuilt = build_discrete_state(c, moved, k);
            const double exact = discrete_log_likelihood(c, rebuilt, config) - base;
            REQUIRE(delta == Approx(exact).margin(1e-9));
        }
    }
}

TEST_CASE("moves to the current label or out of range are rejected") {
    Corpus c = testutil::make_corpus(2, {testutil::doc("a", {{0, 1}}), testutil::doc("b", {{1, 1}})});
    DiscreteState st = build_discrete_state(c, {0, 1}, 2);
    HyperConfig config = discrete_config(2, 0.5);
    REQUIRE_THROWS_AS(move_delta(st, c, config, 0, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(move_delta(st, c, config, 0, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(move_delta(st, c, config, 0, -1), std::invalid_argument);
}

TEST_CASE("mirrored documents move with equal deltas") {
    // two 2-document clusters whose word and link structure swap under the
    // relabeling (docs 0,1 <-> docs 2,3; topic 0 <-> topic 1; w0 <-> w1)
    Corpus c = testutil::make_corpus(
        2,
        {testutil::doc("a1", {{0, 2}}), testutil::doc("a2", {{0, 1}}), testutil::doc("b1", {{1, 2}}),
         testutil::doc("b2", {{1, 1}})},
        {{0, 1, 1}, {2, 3, 1}});
    DiscreteState st = build_discrete_state(c, {0, 0, 1, 1}, 2);
    HyperConfig config = discrete_config(2, 0.5);
    REQUIRE(move_delta(st, c, config, 0, 1) == Approx(move_delta(st, c, config, 2, 0)).margin(1e-12));
    REQUIRE(move_delta(st, c, config, 1, 1) == Approx(move_delta(st, c, config, 3, 0)).margin(1e-12));
}

TEST_CASE("applying a move keeps the statistics exact") {
    Rng rng(202);
    for (int rep = 0; rep < 30; ++rep) {
        Corpus c = testutil::random_corpus(rng, 14, 8, 0.4);
        const std::size_t k = 2 + rng.next_below(2);
        std::vector<int> labels = random_labels(rng, c.n_docs(), k);
        DiscreteState st = build_discrete_state(c, labels, k);

        for (int i = 0; i < 10; ++i) {
            const std::size_t d = rng.next_below(c.n_docs());
            int target = int(rng.next_below(k));
            if (target == st.labels[d]) target = (target + 1) % int(k);
            apply_move(st, c, d, target);
            labels[d] = target;
        }
        DiscreteState rebuilt = build_discrete_state(c, labels, k);
        REQUIRE(st.labels == rebuilt.labels);
        REQUIRE(st.n == rebuilt.n);
        REQUIRE(st.l_tot == rebuilt.l_tot);
        REQUIRE(st.c == rebuilt.c);
        REQUIRE(st.m == rebuilt.m);
        for (std::size_t i = 0; i < st.cw.size(); ++i)
            REQUIRE(st.cw[i] == Approx(rebuilt.cw[i]).margin(1e-12));
    }
}

TEST_CASE("refinement never lowers the discrete objective") {
    Rng rng(303);
    for (int rep = 0; rep < 15; ++rep) {
        Corpus c = testutil::random_corpus(rng, 14, 8, 0.4);
        const std::size_t k = 2 + rng.next_below(2);
        std::vector<int> labels = random_labels(rng, c.n_docs(), k);
        HyperConfig config = discrete_config(k, rng.next_double(), rng.next_below(2) == 0);

        DiscreteState st = build_discrete_state(c, labels, k);
        const double before = discrete_log_likelihood(c, st, config);
        auto [refined, objective] = kl_refine(c, labels, config);

        REQUIRE(objective >= before);
        DiscreteState check = build_discrete_state(c, refined, k);
        REQUIRE(objective == Approx(discrete_log_likelihood(c, check, config)).margin(1e-9));
    }
}

TEST_CASE("a local optimum is returned unchanged") {
    Corpus c = testutil::make_corpus(
        2,
        {testutil::doc("a1", {{0, 3}}), testutil::doc("a2", {{0, 3}}), testutil::doc("b1", {{1, 3}}),
         testutil::doc("b2", {{1, 3}})},
        {{0, 1, 2}, {2, 3, 2}});
    const std::vector<int> optimal{0, 0, 1, 1};
    HyperConfig config = discrete_config(2, 0.5);
    auto [labels, objective] = kl_refine(c, optimal, config);
    REQUIRE(labels == optimal);
    DiscreteState st = build_discrete_state(c, optimal, 2);
    REQUIRE(objective == Approx(discrete_log_likelihood(c, st, config)).margin(1e-12));
}

TEST_CASE("refinement repairs lightly corrupted planted labels") {
    auto [corpus, truth] = planted_fixture("two-clusters-strong", 7);
    std::vector<int> labels = truth_labels(truth);
    Rng rng(13);
    for (int i = 0; i < 10; ++i) {  // flip 5% of the 200 documents
        const std::size_t d = rng.next_below(labels.size());
        labels[d] = 1 - labels[d];
    }
    HyperConfig config = discrete_config(2, 0.5);
    auto [refined, objective] = kl_refine(corpus, labels, config);
    REQUIRE(refined == truth_labels(truth));
}
