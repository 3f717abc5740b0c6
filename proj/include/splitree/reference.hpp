#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace splitree::reference {

inline constexpr double kEuler = 0.57721566490153286061;
inline constexpr double kPi = 3.14159265358979323846;

// E[Psi_n] for the binary search tree via the subtree-size recursion
// E[Psi_n] = n - 1 + (2/n) sum_{k<n} E[Psi_k]; independent of the tree
// generator it is used to check.
inline std::vector<double> bst_mean_psi_table(std::int64_t n_max) {
    std::vector<double> e(static_cast<std::size_t>(n_max) + 1, 0.0);
    double acc = 0.0;  // sum of e[0..n-1]
    for (std::int64_t n = 1; n <= n_max; ++n) {
        e[n] = n >= 2 ? static_cast<double>(n - 1) + 2.0 / static_cast<double>(n) * acc : 0.0;
        acc += e[n];
    }
    return e;
}

inline double bst_mean_psi_exact(std::int64_t n) {
    return bst_mean_psi_table(n)[static_cast<std::size_t>(n)];
}

// Four-term expansion 2n ln n + (2 gamma - 4) n + 2 ln n + 2 gamma + 1.
inline double bst_mean_psi_asymptotic(std::int64_t n) {
    const double nd = static_cast<double>(n);
    return 2.0 * nd * std::log(nd) + nd * (2.0 * kEuler - 4.0) + 2.0 * std::log(nd) +
           2.0 * kEuler + 1.0;
}

// Limit variance of the normalized bst path length (quicksort law).
inline double quicksort_zeta() { return 7.0 - 2.0 * kPi * kPi / 3.0; }

// U(t) = sum_k 2^k P(Gamma(k,1) <= t) for the bst walk (-ln V ~ Exp(1)),
// evaluated by the partial series with explicit tail control.
inline double bst_renewal_U_series(double t, double tol = 1e-10) {
    if (t <= 0.0) return 0.0;
    double total = 0.0;
    double weight = 1.0;           // 2^k
    double gamma_cdf = 1.0;        // P(Gamma(k) <= t), k = 0
    double pois = std::exp(-t);    // e^{-t} t^k / k!, k = 0
    for (int k = 1; k <= 4000; ++k) {
        gamma_cdf -= pois;         // P(Gamma(k) <= t) = P(Gamma(k-1) <= t) - pois(k-1)
        pois *= t / static_cast<double>(k);
        weight *= 2.0;
        const double term = weight * gamma_cdf;
        total += term;
        // the summands eventually decay doubly exponentially
        if (k > 2 * t + 20 && term < tol) break;
    }
    return total;
}

// Two-sided overshoot class mass for the bst walk: c_alpha = 2 gamma exactly.
inline double bst_overshoot_mass(double gamma) { return 2.0 * gamma; }

}  // namespace splitree::reference
