#include "splitree/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace splitree {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : samples_(std::move(samples)) {
    std::sort(samples_.begin(), samples_.end());
}

EmpiricalDistribution EmpiricalDistribution::point_mass(double value, std::size_t size) {
    return EmpiricalDistribution(std::vector<double>(size, value));
}

double EmpiricalDistribution::mean() const {
    if (samples_.empty()) return 0.0;
    double s = 0.0;
    for (double x : samples_) s += x;
    return s / static_cast<double>(samples_.size());
}

double EmpiricalDistribution::variance() const {
    if (samples_.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double x : samples_) s += (x - m) * (x - m);
    return s / static_cast<double>(samples_.size());
}

double EmpiricalDistribution::central_moment(int k) const {
    if (samples_.empty()) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double x : samples_) s += std::pow(x - m, k);
    return s / static_cast<double>(samples_.size());
}

EmpiricalDistribution EmpiricalDistribution::thinned(std::size_t target) const {
    if (target == 0 || target > samples_.size())
        throw std::invalid_argument("thinned: bad target size");
    std::vector<double> out;
    out.reserve(target);
    const double step = static_cast<double>(samples_.size()) / static_cast<double>(target);
    for (std::size_t i = 0; i < target; ++i) {
        auto idx = static_cast<std::size_t>((static_cast<double>(i) + 0.5) * step);
        if (idx >= samples_.size()) idx = samples_.size() - 1;
        out.push_back(samples_[idx]);
    }
    EmpiricalDistribution e;
    e.samples_ = std::move(out);  // order statistics of a sorted buffer stay sorted
    return e;
}

EmpiricalDistribution EmpiricalDistribution::recentered() const {
    const double m = mean();
    EmpiricalDistribution out;
    out.samples_ = samples_;
    for (auto& x : out.samples_) x -= m;  // shift preserves the ordering
    return out;
}

double wasserstein2(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("wasserstein2: equal-size contract violated");
    if (a.size() < 2) throw std::invalid_argument("wasserstein2: need at least 2 samples");
    double s = 0.0;
    const auto& xa = a.samples();
    const auto& xb = b.samples();
    for (std::size_t i = 0; i < xa.size(); ++i) {
        const double d = xa[i] - xb[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(xa.size()));
}

double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> xa(a), xb(b);
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    const double na = static_cast<double>(xa.size()), nb = static_cast<double>(xb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xa.size() && j < xb.size()) {
        const double x = std::min(xa[i], xb[j]);
        while (i < xa.size() && xa[i] <= x) ++i;
        while (j < xb.size() && xb[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_to_standard_normal(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("ks: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = normal_cdf(samples[i]);
        d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - f,
                                 f - static_cast<double>(i) / n));
    }
    return d;
}

double ks_two_sample_critical(double alpha, std::size_t m, std::size_t n) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(static_cast<double>(m + n) /
                         (static_cast<double>(m) * static_cast<double>(n)));
}

}  // namespace splitree
