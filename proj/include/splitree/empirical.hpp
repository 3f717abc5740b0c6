#pragma once

#include <cstdint>
#include <vector>

#include "splitree/model.hpp"

namespace splitree {

// Sorted sample buffer standing in for a law with finite second moment.
class EmpiricalDistribution {
public:
    EmpiricalDistribution() = default;
    explicit EmpiricalDistribution(std::vector<double> samples);

    static EmpiricalDistribution point_mass(double value, std::size_t size);

    const std::vector<double>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    double mean() const;
    double variance() const;  // population variance of the sample
    double central_moment(int k) const;

    // deterministic down-sampling to `target` values (every size/target-th
    // order statistic); keeps the equal-size contract usable across modules
    EmpiricalDistribution thinned(std::size_t target) const;

    // samples shifted to empirical mean zero
    EmpiricalDistribution recentered() const;

private:
    std::vector<double> samples_;  // ascending
};

// Exact d2 between two equal-size empirical laws on the line
// (root mean square of order-statistic differences).
double wasserstein2(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b);

// One-sample KS distance to the standard normal law.
double ks_to_standard_normal(std::vector<double> samples);

// Asymptotic two-sample critical value c(alpha) * sqrt((m+n)/(m*n)).
double ks_two_sample_critical(double alpha, std::size_t m, std::size_t n);

}  // namespace splitree
