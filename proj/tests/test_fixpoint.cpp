#include <doctest.h>

#include <cmath>

#include "splitree/constants.hpp"
#include "splitree/fixpoint.hpp"
#include "splitree/reference.hpp"

using namespace splitree;

namespace {

// quadrature oracle for E[C(U)^2] on a fixed fine grid
double bst_second_moment_C_oracle() {
    const int panels = 1 << 16;
    double acc = 0.0;
    for (int i = 0; i <= panels; ++i) {
        const double u = static_cast<double>(i) / panels;
        const double c = 1.0 + 2.0 * ((u > 0 ? u * std::log(u) : 0.0) +
                                      (u < 1 ? (1 - u) * std::log(1 - u) : 0.0));
        acc += (i == 0 || i == panels ? 1.0 : (i % 2 ? 4.0 : 2.0)) * c * c;
    }
    return acc / (3.0 * panels);
}

}  // namespace

TEST_CASE("apply_T on a point mass") {
    const auto trie = preset("trie", {0.5, 0.5});
    const auto zero = EmpiricalDistribution::point_mass(0.0, 5000);
    const auto out = apply_T(zero, trie, std::log(2.0), 5000, 9);
    for (double x : out.samples()) CHECK(x == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));

    // bst: one application of T to delta_0 has variance E[C^2]
    const auto bst = preset("bst");
    const auto big = EmpiricalDistribution::point_mass(0.0, 100000);
    const auto t1 = apply_T(big, bst, 0.5, 100000, 10);
    const double want = bst_second_moment_C_oracle();
    CHECK(want == doctest::Approx(0.140088).epsilon(1e-4));
    const double se = want * std::sqrt(2.0 / 100000.0);  // rough var-of-var scale
    CHECK(std::fabs(t1.variance() - want) < 6.0 * se);
}

TEST_CASE("apply_T preserves zero mean") {
    RngStream rng(30);
    for (const auto* text : {"bst", "mary:3", "lattice_example"}) {
        const auto m = parse_model(text);
        const auto [mu, s2] = compute_mu_sigma(m);
        (void)s2;
        std::vector<double> x(20000);
        for (auto& v : x) v = rng.normal();
        double mean = 0.0;
        for (double v : x) mean += v;
        for (auto& v : x) v -= mean / x.size();
        const auto out = apply_T(EmpiricalDistribution{std::move(x)}, m, mu, 20000,
                                 rng.next_u64());
        CHECK(std::fabs(out.mean()) <=
              5.0 * std::sqrt(out.variance() / static_cast<double>(out.size())));
    }
}

TEST_CASE("iterate_to_fixpoint on the digital case is immediate") {
    const auto run = iterate_to_fixpoint(preset("trie", {0.5, 0.5}), 2000, 1e-6, 20, 4);
    CHECK(run.converged);
    CHECK(run.iterations <= 3);
    CHECK(run.final_variance == doctest::Approx(0.0).scale(1.0).epsilon(1e-20));
    for (double s : run.step_sizes) CHECK(s == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("bst fixpoint reproduces the quicksort limit") {
    const auto run = quicksort_fixpoint(30000, 1.2e-2, 80, 77);
    CHECK(run.converged);
    const double zeta = reference::quicksort_zeta();
    CHECK(std::fabs(run.final_mean) <=
          5.0 * std::sqrt(run.final_variance / static_cast<double>(run.final_distribution.size())));
    CHECK(run.final_variance == doctest::Approx(zeta).epsilon(0.04));

    // step sizes decay inside the sqrt(b E[V^2]) envelope (plus noise floor)
    for (std::size_t i = 1; i < run.step_sizes.size(); ++i)
        CHECK(run.step_sizes[i] <= 0.8165 * run.step_sizes[i - 1] + 0.01);

    // third central moment: positive right skew, stable across seeds, value
    // from the moment recursion E[X^3](1-2E[U^3]) = 6 E[U^2 C] zeta + E[C^3]
    const auto run2 = quicksort_fixpoint(30000, 1.2e-2, 80, 78);
    const double m3a = run.final_distribution.central_moment(3);
    const double m3b = run2.final_distribution.central_moment(3);
    CHECK(m3a > 0.0);
    CHECK(m3b > 0.0);
    CHECK(m3a == doctest::Approx(0.23291).epsilon(0.2));
}

TEST_CASE("lattice fixpoint variance matches the zeta formula") {
    const auto m = preset("lattice_example");
    const auto run = iterate_to_fixpoint(m, 50000, 5e-3, 80, 5);
    CHECK(run.converged);
    CHECK(run.final_variance == doctest::Approx(compute_zeta(m)).epsilon(0.03));
}

TEST_CASE("fixpoint cross-checks zeta for mary(3) and quadtree(2)") {
    for (const auto* text : {"mary:3", "quadtree:2"}) {
        const auto m = parse_model(text);
        const auto run = iterate_to_fixpoint(m, 50000, 1.0e-2, 80, 6);
        CHECK(run.converged);
        CHECK(run.final_variance == doctest::Approx(compute_zeta(m)).epsilon(0.05));
    }
}

TEST_CASE("contraction ratios concentrate at b E[V^2]") {
    // squared-distance ratios: trie scale pairs sit exactly at 1/2
    const auto trie = preset("trie", {0.5, 0.5});
    const auto rep = check_contraction(trie, 10, 20000, 3);
    REQUIRE(rep.records.size() == 10);
    for (const auto& r : rep.records)
        CHECK(r.ratio_sq == doctest::Approx(0.5).epsilon(0.05));

    const auto bst = check_contraction(preset("bst"), 10, 20000, 3);
    for (const auto& r : bst.records) {
        CHECK(r.ratio_sq <= 2.0 / 3.0 + 0.07);
        CHECK(r.d2_out < r.d2_in);
    }

    // shape pairs also contract
    const auto shape = check_contraction(preset("bst"), 6, 20000, 4,
                                         PairFamily::normal_vs_uniform);
    for (const auto& r : shape.records) CHECK(r.ratio_sq <= 2.0 / 3.0 + 0.07);
}

TEST_CASE("iterate_to_fixpoint validates inputs") {
    CHECK_THROWS_AS(iterate_to_fixpoint(preset("bst"), 10, 1e-3, 5, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(iterate_to_fixpoint(preset("bst"), 5000, -1.0, 5, 1),
                    std::invalid_argument);
}
