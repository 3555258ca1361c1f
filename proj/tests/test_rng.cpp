#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <mixtopic/rng.hpp>

using mixtopic::Rng;
using mixtopic::fork_seed;

TEST_CASE("same seed reproduces the stream bit for bit") {
    Rng a(42), b(42);
    for (int i = 0; i < 64; ++i) REQUIRE(a.next_u64() == b.next_u64());
    Rng c(42), d(43);
    bool differ = false;
    for (int i = 0; i < 8; ++i) differ |= (c.next_u64() != d.next_u64());
    REQUIRE(differ);
}

TEST_CASE("forked streams depend on seed and tag only") {
    Rng parent(7);
    Rng child_early = parent.fork(3);
    for (int i = 0; i < 100; ++i) parent.next_u64();  // drain the parent
    Rng child_late = parent.fork(3);
    REQUIRE(child_early.next_u64() == child_late.next_u64());

    REQUIRE(fork_seed(7, 3) != fork_seed(7, 4));
    REQUIRE(fork_seed(7, 3) != fork_seed(8, 3));
    // a fork is not the parent stream shifted
    Rng p2(7);
    REQUIRE(p2.fork(0).next_u64() != Rng(7).next_u64());
}

TEST_CASE("next_below stays in range and rejects zero") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) REQUIRE(rng.next_below(7) < 7);
    REQUIRE_THROWS_AS(rng.next_below(0), std::invalid_argument);

    // rough uniformity over 8 buckets, 16000 draws: expect 2000 per bucket
    std::vector<int> buckets(8, 0);
    for (int i = 0; i < 16000; ++i) ++buckets[rng.next_below(8)];
    for (int b : buckets) {
        REQUIRE(b > 1700);
        REQUIRE(b < 2300);
    }
}

TEST_CASE("next_double lies in the unit interval") {
    Rng rng(5);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double x = rng.next_double();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    REQUIRE(lo < 0.01);
    REQUIRE(hi > 0.99);
}

TEST_CASE("dirichlet rows live on the simplex") {
    Rng rng(9);
    std::vector<double> row(6);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t k = 1 + rng.next_below(6);
        rng.dirichlet1(row.data(), k);
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            REQUIRE(row[i] >= 0.0);
            sum += row[i];
        }
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
    }
    rng.dirichlet1(row.data(), 1);
    REQUIRE(row[0] == 1.0);
}

TEST_CASE("poisson sampling hits the requested mean") {
    Rng rng(13);
    REQUIRE(rng.poisson(0.0) == 0);
    REQUIRE_THROWS_AS(rng.poisson(-1.0), std::invalid_argument);

    double sum = 0.0;
    const int reps = 20000;
    for (int i = 0; i < reps; ++i) sum += double(rng.poisson(3.0));
    const double se = std::sqrt(3.0 / reps);
    REQUIRE(std::abs(sum / reps - 3.0) < 4.0 * se);

    // means above the chunking threshold stay Poisson(mean)
    sum = 0.0;
    const int big_reps = 4000;
    for (int i = 0; i < big_reps; ++i) sum += double(rng.poisson(100.0));
    const double se_big = std::sqrt(100.0 / big_reps);
    REQUIRE(std::abs(sum / big_reps - 100.0) < 4.0 * se_big);
}

TEST_CASE("shuffle permutes and reproduces") {
    Rng a(21), b(21);
    std::vector<int> v(50), w(50);
    std::iota(v.begin(), v.end(), 0);
    std::iota(w.begin(), w.end(), 0);
    a.shuffle(v);
    b.shuffle(w);
    REQUIRE(v == w);
    REQUIRE(v != std::vector<int>(50, 0));

    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(50);
    std::iota(expect.begin(), expect.end(), 0);
    REQUIRE(sorted == expect);

    std::vector<int> empty, one{7};
    a.shuffle(empty);
    a.shuffle(one);
    REQUIRE(empty.empty());
    REQUIRE(one == std::vector<int>{7});
}
