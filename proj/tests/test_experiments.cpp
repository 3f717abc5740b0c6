#include <doctest.h>

#include <cmath>

#include "splitree/constants.hpp"
#include "splitree/experiments.hpp"
#include "splitree/reference.hpp"

using namespace splitree;

namespace {

ExperimentConfig cfg(const std::string& model, std::vector<std::int64_t> ns,
                     std::int64_t replicas, std::uint64_t seed) {
    ExperimentConfig c;
    c.model = model;
    c.n_values = std::move(ns);
    c.replicas = replicas;
    c.master_seed = seed;
    return c;
}

}  // namespace

TEST_CASE("run handles degenerate sizes exactly") {
    const auto r = run(cfg("bst", {1, 2}, 500, 3));
    CHECK(r.per_n[0].mean_psi == 0.0);
    CHECK(r.per_n[0].var_psi == 0.0);
    CHECK(r.per_n[1].mean_psi == 1.0);  // Psi deterministic at n=2
    CHECK(r.per_n[1].var_psi == 0.0);
}

TEST_CASE("run matches the DP oracle at n=20") {
    const auto r = run(cfg("bst", {20}, 20000, 5));
    const double want = reference::bst_mean_psi_exact(20);
    CHECK(want == doctest::Approx(71.105065600).epsilon(1e-9));
    CHECK(std::fabs(r.per_n[0].mean_psi - want) < 4.0 * r.per_n[0].se_psi);
}

TEST_CASE("identical configs reproduce bit-identical results") {
    const auto a = run(cfg("lattice_example", {5000}, 300, 17));
    const auto b = run(cfg("lattice_example", {5000}, 300, 17));
    CHECK(a.per_n[0].mean_psi == b.per_n[0].mean_psi);
    CHECK(a.per_n[0].var_psi == b.per_n[0].var_psi);
    CHECK(a.per_n[0].xn == b.per_n[0].xn);
}

TEST_CASE("standard errors scale like 1/sqrt(replicas)") {
    const auto small = run(cfg("bst", {1000}, 2000, 23));
    const auto big = run(cfg("bst", {1000}, 8000, 23));
    const double ratio = small.per_n[0].se_psi / big.per_n[0].se_psi;
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.20));
    CHECK(small.per_n[0].var_psi >= 0.0);
}

TEST_CASE("config validation and budget guard") {
    CHECK_THROWS_AS(run(cfg("bst", {100}, 1, 1)).per_n.size(), ConfigError);
    CHECK_THROWS_AS(run(cfg("bst", {100, 100}, 10, 1)).per_n.size(), ConfigError);
    auto c = cfg("bst", {1000}, 100, 1);
    c.item_budget = 1000;
    CHECK_THROWS_AS(run(c), BudgetError);
}

TEST_CASE("check_mean_asymptotics on bst") {
    const auto model = preset("bst");
    const auto r = run(cfg("bst", {12500, 25000, 50000}, 2500, 31));
    const auto rep = check_mean_asymptotics(model, r);
    CHECK(rep.cauchy_ok);
    REQUIRE(rep.bst_abs_err.has_value());
    CHECK(*rep.bst_abs_err <= *rep.bst_threshold);

    // insufficient coverage is rejected
    const auto narrow = run(cfg("bst", {1000, 1500, 2000}, 100, 1));
    CHECK_THROWS_AS(check_mean_asymptotics(model, narrow), ConfigError);
    const auto two = run(cfg("bst", {1000, 4000}, 100, 1));
    CHECK_THROWS_AS(check_mean_asymptotics(model, two), ConfigError);
}

TEST_CASE("trie q-hat stabilizes (digital case, stabilization only)") {
    const auto model = preset("trie", {0.5, 0.5});
    const auto r = run(cfg("trie:0.5,0.5", {8192, 16384, 32768}, 1200, 37));
    const auto rep = check_mean_asymptotics(model, r);
    CHECK(rep.cauchy_ok);
}

TEST_CASE("lattice_oscillation structure") {
    const auto lat = preset("lattice_example");
    const auto rep = lattice_oscillation(lat, 2, 600.0, 80, 7);
    CHECK(rep.cells.size() >= 4);
    for (const auto& c : rep.cells) {
        CHECK(c.n >= 600);
        CHECK(std::isfinite(c.q_hat));
        CHECK(c.se > 0.0);
        // n really is round(exp(j d + beta))
        CHECK(c.n ==
              std::llround(std::exp(static_cast<double>(c.j) * lat.lattice_span + c.beta)));
    }
    CHECK(rep.across_spread >= 0.0);

    CHECK_THROWS_AS(lattice_oscillation(preset("bst"), 4, 1000.0, 50, 1), ConfigError);

    // d > 0 but C = 0: runs, reports, asserts nothing
    const auto trie_rep = lattice_oscillation(preset("trie", {0.5, 0.5}), 2, 600.0, 60, 9);
    CHECK(trie_rep.cells.size() >= 4);
}

TEST_CASE("check_limit_law for the degenerate trie collapses to zero") {
    // Var(Psi) = O(n) for the symmetric trie, so W2(X_n, delta_0) ~ 1/sqrt(n)
    const auto model = preset("trie", {0.5, 0.5});
    const auto fix = iterate_to_fixpoint(model, 2000, 1e-6, 20, 3);
    const auto near = check_limit_law(model, 2500, 2000, fix, 21);
    const auto far = check_limit_law(model, 10000, 2000, fix, 21);
    CHECK(far.w2 < 0.7 * near.w2);
    CHECK(far.w2 < 0.05);

    CHECK_THROWS_AS(check_limit_law(model, 1000, 500, fix, 21), ConfigError);
}

TEST_CASE("bst limit-law distance shrinks with n") {
    const auto model = preset("bst");
    const auto fix = iterate_to_fixpoint(model, 20000, 1.5e-2, 80, 3);
    const auto at100 = check_limit_law(model, 100, 20000, fix, 23);
    const auto at10k = check_limit_law(model, 10000, 20000, fix, 23);
    CHECK(at10k.w2 < at100.w2);
    CHECK(at10k.w2 < 0.05);
}

TEST_CASE("depth CLT check") {
    CHECK_THROWS_AS(depth_clt_check(preset("trie", {0.5, 0.5}), 1000, 100, 1), ConfigError);
    const double ks = depth_clt_check(preset("bst"), 10000, 2000, 5);
    CHECK(ks < 0.25);
}

TEST_CASE("smoothness of the mean in K") {
    const auto rows = smoothness_check(preset("bst"), 10000, {0, 1, 10, 100}, 150, 11);
    CHECK(rows[0].mean_diff == 0.0);  // K = 0: coupled trees are identical
    double prev = -1.0;
    for (const auto& r : rows) {
        CHECK(r.mean_diff >= -3.0 * r.se);
        CHECK(r.mean_diff >= prev - 3.0 * r.se);
        prev = r.mean_diff;
        if (r.k > 0) {
            const double cap = (r.mean_diff + 3.0 * r.se) /
                               (static_cast<double>(r.k) * std::log(10000.0 + r.k));
            CHECK(cap <= 10.0);
        }
    }
}

TEST_CASE("upsilon corollary check") {
    // bst: one item per node, so Upsilon = Psi and alpha = 1 exactly
    const auto bst_rep = upsilon_corollary_check(preset("bst"), {2000, 4000, 8000}, 400, 3);
    CHECK(bst_rep.alpha_hat == 1.0);
    CHECK(bst_rep.alpha_se == 0.0);
    CHECK(bst_rep.cauchy_ok);

    const auto trie_rep =
        upsilon_corollary_check(preset("trie", {0.6, 0.4}), {4000, 8000, 16000}, 1200, 5);
    CHECK(trie_rep.cauchy_ok);
    CHECK(trie_rep.alpha_hat > 1.0);  // tries materialize internal chain nodes

    const auto mary_rep = upsilon_corollary_check(preset("mary", {3}), {4000, 8000, 16000},
                                                  1200, 7);
    CHECK(mary_rep.alpha_hat < 1.0);  // several items per node
    CHECK(mary_rep.alpha_hat > 0.2);
    CHECK(mary_rep.cauchy_ok);

    CHECK_THROWS_AS(upsilon_corollary_check(preset("lattice_example"), {1000, 2000}, 100, 1),
                    ConfigError);
}

TEST_CASE("cross-module variance consistency") {
    // Var(Psi)/n^2 from simulation vs zeta from the moment formula vs the
    // converged fixed-point variance, within combined uncertainties
    const auto model = preset("bst");
    const auto r = run(cfg("bst", {50000}, 2500, 41));
    const double n2 = 50000.0 * 50000.0;
    const double vn2 = r.per_n[0].var_psi / n2;
    const double se = r.per_n[0].se_var_psi / n2;
    const double zeta = compute_zeta(model);
    CHECK(std::fabs(vn2 - zeta) <= 3.0 * se);

    const auto fix = iterate_to_fixpoint(model, 50000, 7e-3, 80, 41);
    REQUIRE(fix.converged);
    const double fix_se = fix.final_variance * std::sqrt(2.0 / 50000.0) * 2.0;
    CHECK(std::fabs(vn2 - fix.final_variance) <= 3.0 * std::sqrt(se * se + fix_se * fix_se));
}

TEST_CASE("lattice oscillation estimates are reproducible") {
    const auto lat = preset("lattice_example");
    const auto a = lattice_oscillation(lat, 2, 400.0, 60, 5);
    const auto b = lattice_oscillation(lat, 2, 400.0, 60, 5);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].q_hat == b.cells[i].q_hat);
        CHECK(a.cells[i].n == b.cells[i].n);
    }
}

TEST_CASE("concentration of subtree cardinalities") {
    const auto rows =
        concentration_check(preset("bst"), 200000, 6, {100.0, 1000.0}, 20, 13);
    for (const auto& r : rows) {
        CHECK(r.eligible > 0);
        CHECK(r.frequency <= r.bound + 3.0 * r.se);
    }
}
