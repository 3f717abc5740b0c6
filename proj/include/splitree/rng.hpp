#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace splitree {

// SplitMix64 step; also the mixer used to derive substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a, b), c);
}

// xoshiro256++ with substreams derived by seed hashing rather than jumps.
// All draws are deterministic functions of the 64-bit seed label, identical
// across platforms for the integer path (floating draws depend only on the
// integer stream and arithmetic below).
class RngStream {
public:
    RngStream() : RngStream(0) {}

    explicit RngStream(std::uint64_t seed) {
        std::uint64_t z = seed;
        for (auto& w : s_) {
            z = mix64(z);
            w = z;
        }
        // avoid the all-zero state (mix64 chain from 0 never yields it, but
        // keep the guard for arbitrary direct seeding)
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = 0x9e3779b97f4a7c15ULL;
    }

    static RngStream derived(std::uint64_t a, std::uint64_t b) { return RngStream(mix64(a, b)); }
    static RngStream derived(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
        return RngStream(mix64(a, b, c));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0,1) with 53 random bits
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0,1], safe as a log() argument
    double u01_open() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    // uniform integer in [0, n); n >= 1. floor(u*n) carries O(n*2^-53) bias,
    // irrelevant at the sample sizes used here.
    std::uint64_t uniform_index(std::uint64_t n) {
        auto k = static_cast<std::uint64_t>(u01() * static_cast<double>(n));
        return k >= n ? n - 1 : k;
    }

    double exponential(double rate) { return -std::log(u01_open()) / rate; }

    // Box-Muller, always consumes exactly two uniforms
    double normal() {
        const double r = std::sqrt(-2.0 * std::log(u01_open()));
        const double th = 6.283185307179586476925 * u01();
        return r * std::cos(th);
    }

    // Marsaglia-Tsang; consumption varies (rejection), which is fine because
    // each consumer owns its stream.
    double gamma(double alpha) {
        if (alpha < 1.0) {
            const double u = u01_open();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = u01_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Exact binomial quantile: smallest k with P(Bin(n,p) <= k) >= u.
// Monotone in u and in n; used as the one-uniform binomial sampler.
std::int64_t binomial_quantile(double u, std::int64_t n, double p);

inline std::int64_t binomial(RngStream& rng, std::int64_t n, double p) {
    const double u = rng.u01();  // always consume exactly one uniform
    if (n <= 0) return 0;
    return binomial_quantile(u, n, p);
}

// Sequential conditional-binomial multinomial split of `trials` over `probs`
// (probs sum to 1). Consumes exactly probs.size()-1 uniforms.
void multinomial(RngStream& rng, std::int64_t trials, const std::vector<double>& probs,
                 std::vector<std::int64_t>& out);

// Regularized incomplete beta I_x(a,b) (continued fraction); exposed for tests.
double incomplete_beta(double a, double b, double x);

// Standard normal quantile (Acklam), used only to seed the exact binomial
// quantile search.
double normal_quantile(double u);

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

}  // namespace splitree
