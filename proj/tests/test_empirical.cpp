#include <doctest.h>

#include <cmath>

#include "splitree/empirical.hpp"

using namespace splitree;

TEST_CASE("wasserstein2 basics") {
    EmpiricalDistribution a{{0.0, 1.0, 2.0}};
    CHECK(wasserstein2(a, a) == 0.0);

    EmpiricalDistribution shifted{{1.5, 2.5, 3.5}};
    CHECK(wasserstein2(a, shifted) == doctest::Approx(1.5).epsilon(1e-14));

    EmpiricalDistribution x{{0.0, 1.0}}, y{{1.0, 3.0}};
    CHECK(wasserstein2(x, y) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-14));

    EmpiricalDistribution z{{0.0, 1.0, 2.0, 3.0}};
    CHECK_THROWS_AS(wasserstein2(a, z), std::invalid_argument);
}

TEST_CASE("samples are kept sorted and moments work") {
    EmpiricalDistribution d{{3.0, 1.0, 2.0}};
    CHECK(d.samples() == std::vector<double>({1.0, 2.0, 3.0}));
    CHECK(d.mean() == doctest::Approx(2.0));
    CHECK(d.variance() == doctest::Approx(2.0 / 3.0));
    CHECK(d.central_moment(3) == doctest::Approx(0.0).scale(1.0));

    const auto thin = d.thinned(2);
    CHECK(thin.size() == 2);
    CHECK(std::is_sorted(thin.samples().begin(), thin.samples().end()));
}

TEST_CASE("two-sample KS statistic") {
    std::vector<double> a, b;
    RngStream rng(6);
    for (int i = 0; i < 4000; ++i) a.push_back(rng.normal());
    for (int i = 0; i < 4000; ++i) b.push_back(rng.normal());
    const double same = ks_two_sample(a, b);
    CHECK(same < ks_two_sample_critical(0.01, a.size(), b.size()));

    for (auto& x : b) x += 10.0;
    CHECK(ks_two_sample(a, b) == doctest::Approx(1.0));
}

TEST_CASE("KS critical value matches the asymptotic formula") {
    // c(0.01) = 1.6276..., so the n=m=1e4 critical value is ~0.0230
    CHECK(ks_two_sample_critical(0.01, 10000, 10000) ==
          doctest::Approx(1.6276 * std::sqrt(2.0 / 10000.0)).epsilon(1e-4));
}

TEST_CASE("one-sample KS against the standard normal") {
    RngStream rng(15);
    std::vector<double> z(20000);
    for (auto& x : z) x = rng.normal();
    CHECK(ks_to_standard_normal(z) < 1.63 / std::sqrt(static_cast<double>(z.size())));

    std::vector<double> biased(20000);
    for (auto& x : biased) x = rng.normal() + 0.5;
    CHECK(ks_to_standard_normal(biased) > 0.15);
}
