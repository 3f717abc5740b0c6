#include <doctest.h>

#include <cmath>
#include <vector>

#include "splitree/rng.hpp"

using namespace splitree;

namespace {

// brute-force binomial CDF for small n, independent of the library path
double brute_cdf(std::int64_t k, std::int64_t n, double p) {
    double cdf = 0.0;
    for (std::int64_t j = 0; j <= k; ++j) {
        double lc = 0.0;
        for (std::int64_t i = 0; i < j; ++i)
            lc += std::log(static_cast<double>(n - i)) - std::log(static_cast<double>(i + 1));
        cdf += std::exp(lc + j * std::log(p) + (n - j) * std::log1p(-p));
    }
    return std::min(1.0, cdf);
}

}  // namespace

TEST_CASE("RngStream determinism and derivation") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c = RngStream::derived(42, 1);
    RngStream d = RngStream::derived(42, 2);
    CHECK(c.next_u64() != d.next_u64());

    RngStream e(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = e.u01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal_quantile inverts the normal cdf") {
    for (double u : {1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.95, 0.9999}) {
        CHECK(normal_cdf(normal_quantile(u)) == doctest::Approx(u).epsilon(1e-6));
    }
}

TEST_CASE("incomplete beta basics") {
    CHECK(incomplete_beta(2.0, 2.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
    for (double x : {0.1, 0.4, 0.8}) {
        const double lhs = incomplete_beta(3.5, 2.25, x);
        const double rhs = 1.0 - incomplete_beta(2.25, 3.5, 1.0 - x);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("binomial_quantile matches the brute-force CDF for small n") {
    const std::int64_t n = 10;
    const double p = 0.3;
    for (double u = 0.005; u < 1.0; u += 0.01) {
        std::int64_t want = 0;
        while (want < n && brute_cdf(want, n, p) < u) ++want;
        CHECK(binomial_quantile(u, n, p) == want);
    }
    // large-n path against the same oracle on a case that crosses n=64
    const std::int64_t n2 = 80;
    for (double u = 0.01; u < 1.0; u += 0.017) {
        std::int64_t want = 0;
        while (want < n2 && brute_cdf(want, n2, 0.47) < u) ++want;
        CHECK(binomial_quantile(u, n2, 0.47) == want);
    }
}

TEST_CASE("binomial_quantile is monotone in u and in n") {
    RngStream rng(123);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(rng.uniform_index(5000));
        const double p = rng.u01();
        const double u1 = rng.u01(), u2 = rng.u01();
        const auto lo = std::min(u1, u2), hi = std::max(u1, u2);
        const auto qlo = binomial_quantile(lo, n, p);
        const auto qhi = binomial_quantile(hi, n, p);
        CHECK(qlo <= qhi);
        // quantile coupling: one extra trial moves the count by at most one
        const auto qn1 = binomial_quantile(u1, n + 1, p);
        const auto qn0 = binomial_quantile(u1, n, p);
        CHECK(qn1 >= qn0);
        CHECK(qn1 <= qn0 + 1);
    }
}

TEST_CASE("binomial moments at large n") {
    RngStream rng(5);
    const std::int64_t n = 1000000;
    const double p = 0.3;
    const int reps = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < reps; ++i) {
        const double x = static_cast<double>(binomial(rng, n, p));
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / reps;
    const double var = sumsq / reps - mean * mean;
    const double want_mean = n * p;
    const double want_var = n * p * (1 - p);
    const double se_mean = std::sqrt(want_var / reps);
    CHECK(std::fabs(mean - want_mean) < 4.0 * se_mean);
    CHECK(var == doctest::Approx(want_var).epsilon(0.05));
}

TEST_CASE("binomial edge cases") {
    RngStream rng(1);
    CHECK(binomial(rng, 0, 0.5) == 0);
    CHECK(binomial(rng, 100, 0.0) == 0);
    CHECK(binomial(rng, 100, 1.0) == 100);
    CHECK(binomial_quantile(0.5, 1, 1e-12) == 0);
    CHECK(binomial_quantile(1.0 - 1e-16, 50, 0.5) == 50);
}

TEST_CASE("multinomial conserves trials and respects zero components") {
    RngStream rng(9);
    std::vector<std::int64_t> out;
    const std::vector<double> probs = {0.5, 0.25, 0.25, 0.0, 0.0};
    for (int i = 0; i < 500; ++i) {
        multinomial(rng, 1000, probs, out);
        std::int64_t sum = 0;
        for (std::size_t j = 0; j < out.size(); ++j) {
            sum += out[j];
            if (probs[j] == 0.0) CHECK(out[j] == 0);
        }
        CHECK(sum == 1000);
    }
}

TEST_CASE("multinomial mean matches the marginal") {
    // mean of the first coordinate of Mult(999; 0.3, 0.7) over many draws
    RngStream rng(77);
    std::vector<std::int64_t> out;
    const std::vector<double> probs = {0.3, 0.7};
    const int reps = 100000;
    double sum = 0.0;
    for (int i = 0; i < reps; ++i) {
        multinomial(rng, 999, probs, out);
        sum += static_cast<double>(out[0]);
    }
    const double mean = sum / reps;
    const double se = std::sqrt(999 * 0.3 * 0.7 / reps);
    CHECK(std::fabs(mean - 299.7) < 4.0 * se);
}
