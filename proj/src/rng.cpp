#include "splitree/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace splitree {

namespace {

// Lentz continued fraction for the incomplete beta (Numerical Recipes form).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

// P(Bin(n,p) <= k) via the incomplete beta identity.
double binom_cdf(std::int64_t k, std::int64_t n, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    // F(k) = I_{1-p}(n-k, k+1)
    return incomplete_beta(static_cast<double>(n - k), static_cast<double>(k + 1), 1.0 - p);
}

double binom_pmf(std::int64_t k, std::int64_t n, double p) {
    if (k < 0 || k > n) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);
    const double lg = std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
                      kd * std::log(p) + (nd - kd) * std::log1p(-p);
    return std::exp(lg);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lnfront =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(lnfront);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double normal_quantile(double u) {
    // Acklam's rational approximation, |rel err| < 1.2e-9. Only used as a
    // starting point; the binomial quantile walk corrects exactly.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    if (u <= 0.0) return -38.0;
    if (u >= 1.0) return 38.0;
    if (u < plow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

std::int64_t binomial_quantile(double u, std::int64_t n, double p) {
    if (n < 0) throw std::invalid_argument("binomial_quantile: n < 0");
    if (n == 0) return 0;
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (u <= 0.0) return 0;
    if (u >= 1.0) return n;

    if (n <= 64) {
        // pmf scan from 0; switch to the mirrored problem when p > 1/2 so the
        // recurrence stays well conditioned.
        if (p > 0.5) return n - binomial_quantile(1.0 - std::nextafter(u, 0.0), n, 1.0 - p);
        double pmf = std::exp(static_cast<double>(n) * std::log1p(-p));
        const double ratio = p / (1.0 - p);
        double cdf = pmf;
        std::int64_t k = 0;
        while (cdf < u && k < n) {
            pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
            cdf += pmf;
            ++k;
        }
        return k;
    }

    // Normal-approximation start, then exact CDF walk.
    const double mean = static_cast<double>(n) * p;
    const double sd = std::sqrt(mean * (1.0 - p));
    double guess = mean + sd * normal_quantile(u);
    std::int64_t k = static_cast<std::int64_t>(std::llround(guess));
    k = std::max<std::int64_t>(0, std::min(n, k));

    double cdf = binom_cdf(k, n, p);
    if (cdf >= u) {
        double pmf = binom_pmf(k, n, p);
        while (k > 0) {
            const double below = cdf - pmf;
            if (below < u) break;
            cdf = below;
            pmf *= (static_cast<double>(k) * (1.0 - p)) / (static_cast<double>(n - k + 1) * p);
            --k;
        }
        return k;
    }
    double pmf = binom_pmf(k + 1, n, p);
    while (k < n) {
        cdf += pmf;
        ++k;
        if (cdf >= u) break;
        pmf *= (p * static_cast<double>(n - k)) / ((1.0 - p) * static_cast<double>(k + 1));
    }
    return k;
}

void multinomial(RngStream& rng, std::int64_t trials, const std::vector<double>& probs,
                 std::vector<std::int64_t>& out) {
    const std::size_t b = probs.size();
    out.assign(b, 0);
    if (b == 0) {
        if (trials > 0) throw std::invalid_argument("multinomial: no categories");
        return;
    }
    // suffix sums for conditional probabilities; backward accumulation keeps
    // the tail exact when components are zero
    std::vector<double> suffix(b + 1, 0.0);
    for (std::size_t i = b; i-- > 0;) suffix[i] = suffix[i + 1] + probs[i];

    std::int64_t rem = trials;
    for (std::size_t i = 0; i + 1 < b; ++i) {
        double pc;
        if (suffix[i] <= 0.0) {
            pc = 0.0;
        } else {
            pc = probs[i] / suffix[i];
            pc = std::min(1.0, std::max(0.0, pc));
        }
        const std::int64_t k = binomial(rng, rem, pc);  // consumes one uniform even when rem==0
        out[i] = k;
        rem -= k;
    }
    out[b - 1] = rem;
}

}  // namespace splitree
