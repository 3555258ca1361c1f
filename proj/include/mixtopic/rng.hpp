#pragma once

// Deterministic, platform-independent random numbers. Every sampled artifact
// in the project is a pure function of a 64-bit seed, independent of the
// standard library's distribution implementations and of thread count, so
// fixtures and restart chains reproduce bit-for-bit anywhere.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mixtopic {

inline std::uint64_t splitmix64_next(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Child-stream seed: hash the tag with one SplitMix64 round, fold it into the
// parent seed, hash again. Used for restart chains, per-document word streams,
// and per-pair link streams, so parallel order never changes results.
inline std::uint64_t fork_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t t = tag;
    std::uint64_t folded = seed ^ splitmix64_next(t);
    return splitmix64_next(folded);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Independent child stream; depends only on the construction seed, never
    // on how much the parent has drawn.
    Rng fork(std::uint64_t tag) const { return Rng(fork_seed(seed_, tag)); }

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // uniform on [0,1), 53 random bits
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0,n), rejection sampled to kill modulo bias
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::next_below: n must be positive");
        std::uint64_t min = (~n + 1) % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= min) return r % n;
        }
    }

    // Exp(1); log1p keeps small uniforms accurate and avoids log(0)
    double exponential() { return -std::log1p(-next_double()); }

    // Symmetric Dirichlet(1) row: normalized exponentials, uniform on the simplex.
    void dirichlet1(double* out, std::size_t k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            out[i] = exponential();
            sum += out[i];
        }
        if (sum <= 0.0) {  // all draws exactly zero; vanishingly rare but defined
            for (std::size_t i = 0; i < k; ++i) out[i] = 1.0 / double(k);
            return;
        }
        for (std::size_t i = 0; i < k; ++i) out[i] /= sum;
    }

    // Poisson by Knuth's product-of-uniforms. Means above 30 are split
    // additively (Poi(a+b) = Poi(a) + Poi(b)) so exp(-mean) never underflows;
    // the result stays exactly Poisson-distributed for any mean.
    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw std::invalid_argument("Rng::poisson: mean must be non-negative");
        std::uint64_t total = 0;
        while (mean > 30.0) {
            total += poisson_small(30.0);
            mean -= 30.0;
        }
        return total + poisson_small(mean);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = std::size_t(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::uint64_t poisson_small(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= next_double();
        } while (p > limit);
        return k - 1;
    }

    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace mixtopic
