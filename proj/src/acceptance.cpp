#include "splitree/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "splitree/constants.hpp"
#include "splitree/experiments.hpp"
#include "splitree/parallel.hpp"
#include "splitree/reference.hpp"
#include "splitree/renewal.hpp"
#include "splitree/tree.hpp"

namespace splitree::acceptance {

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

struct Suite {
    const Config& cfg;
    std::ostream& log;
    std::vector<CriterionResult> results;

    // artifacts shared between criteria
    ExperimentResult bst_1e5;       // criteria 2 and 3
    FixpointRun bst_fix;            // criteria 4 and 6

    explicit Suite(const Config& c, std::ostream& l) : cfg(c), log(l) {}

    void add(int id, const std::string& name, bool pass, const std::string& detail,
             bool skipped = false) {
        results.push_back({id, name, pass, skipped, detail});
        log << "[" << (skipped ? "SKIP" : (pass ? "pass" : "FAIL")) << "] " << id << " " << name
            << ": " << detail << "\n"
            << std::flush;
    }

    void c1_small_n_mean() {
        const std::int64_t replicas = cfg.quick ? 20000 : 100000;
        ExperimentConfig c;
        c.model = "bst";
        c.n_values = {3, 10, 20};
        c.replicas = replicas;
        c.master_seed = mix64(cfg.seed, 1);
        const auto res = run(c);
        const auto oracle = reference::bst_mean_psi_table(20);
        bool ok = true;
        std::ostringstream d;
        for (const auto& e : res.per_n) {
            const double want = oracle[static_cast<std::size_t>(e.n)];
            const double err = std::fabs(e.mean_psi - want);
            ok = ok && err <= 4.0 * e.se_psi;
            d << fmt("n=%lld mean=%.4f oracle=%.4f err=%.4f 4se=%.4f  ",
                     static_cast<long long>(e.n), e.mean_psi, want, err, 4.0 * e.se_psi);
        }
        add(1, "bst exact small-n mean (DP oracle)", ok, d.str());
    }

    void c2_c3_asymptotic_mean_and_variance() {
        ExperimentConfig c;
        c.model = "bst";
        c.n_values = {100000};
        c.replicas = cfg.quick ? 4000 : 10000;
        c.master_seed = mix64(cfg.seed, 2);
        bst_1e5 = run(c);
        const auto& e = bst_1e5.per_n[0];

        const double want = reference::bst_mean_psi_asymptotic(e.n);
        const double tol = 4.0 * e.se_psi + 0.002 * static_cast<double>(e.n);
        const double err = std::fabs(e.mean_psi - want);
        add(2, "bst asymptotic mean 2n ln n + (2g-4)n + ...", err <= tol,
            fmt("n=1e5 mean=%.1f formula=%.1f |err|=%.1f tol=%.1f", e.mean_psi, want, err, tol));

        const double zeta = reference::quicksort_zeta();
        const double vn2 = e.var_psi / (static_cast<double>(e.n) * static_cast<double>(e.n));
        const double rel = std::fabs(vn2 - zeta) / zeta;
        add(3, "bst limit variance Var/n^2 vs quicksort zeta", rel <= 0.05,
            fmt("Var/n^2=%.6f zeta=%.6f rel.err=%.2f%% (<=5%%)", vn2, zeta, 100.0 * rel));
    }

    void c4_fixpoint() {
        bst_fix = iterate_to_fixpoint(preset("bst"), 100000, 5e-3, 60, mix64(cfg.seed, 4));
        const double zeta = reference::quicksort_zeta();
        bool ok = bst_fix.converged && bst_fix.iterations <= 60;
        ok = ok && std::fabs(bst_fix.final_mean) <= 0.01;
        const double rel = std::fabs(bst_fix.final_variance - zeta) / zeta;
        ok = ok && rel <= 0.02;

        const auto lat = preset("lattice_example");
        const auto lat_fix = iterate_to_fixpoint(lat, 100000, 5e-3, 60, mix64(cfg.seed, 41));
        const double lat_zeta = compute_zeta(lat);
        const double lat_rel = std::fabs(lat_fix.final_variance - lat_zeta) / lat_zeta;
        ok = ok && lat_fix.converged && lat_rel <= 0.03;
        add(4, "fixed point: convergence, mean, variance (bst + lattice)", ok,
            fmt("bst: it=%d |mean|=%.4f var=%.5f (zeta=%.5f, rel=%.2f%%); "
                "lattice: it=%d var=%.6f (zeta=%.6f, rel=%.2f%%)",
                bst_fix.iterations, std::fabs(bst_fix.final_mean), bst_fix.final_variance, zeta,
                100.0 * rel, lat_fix.iterations, lat_fix.final_variance, lat_zeta,
                100.0 * lat_rel));
    }

    void c5_contraction() {
        const auto rep = check_contraction(preset("bst"), 20, 100000, mix64(cfg.seed, 5));
        const double bound = 2.0 / 3.0 + cfg.contraction_slack;
        double worst = 0.0;
        for (const auto& r : rep.records) worst = std::max(worst, r.ratio_sq);
        const bool ok = !rep.records.empty() && worst <= bound;
        add(5, "contraction certificate (20 mean-0 scale pairs)", ok,
            fmt("max d2^2-ratio=%.4f bound=%.4f (bE[V^2]=2/3), pairs=%zu skipped=%d", worst,
                bound, rep.records.size(), rep.skipped_degenerate));
    }

    void c6_limit_law() {
        const auto model = preset("bst");
        const std::size_t m = cfg.quick ? 20000 : bst_fix.final_distribution.size();
        FixpointRun fix = bst_fix;
        if (m != fix.final_distribution.size())
            fix.final_distribution = fix.final_distribution.thinned(m);
        std::vector<double> w2s;
        for (const std::int64_t n : {100LL, 1000LL, 10000LL}) {
            const auto rep = check_limit_law(model, n, static_cast<std::int64_t>(m), fix,
                                             mix64(cfg.seed, 6));
            w2s.push_back(rep.w2);
        }
        const bool decreasing = w2s[0] > w2s[1] && w2s[1] > w2s[2];
        const bool ok = decreasing && w2s[2] <= cfg.w2_limit_at_1e4;
        add(6, "limit law: W2(X_n, X) decreasing and small", ok,
            fmt("W2 = %.4f (n=1e2) > %.4f (n=1e3) > %.4f (n=1e4), limit %.3f", w2s[0], w2s[1],
                w2s[2], cfg.w2_limit_at_1e4));
    }

    void c7_renewal_uhat() {
        const auto model = preset("bst");
        const std::int64_t reps = cfg.quick ? 6 : 12;
        const auto table = renewal_U(model, 12.0, 0.02, RenewalMethod::branching_enumeration,
                                     mix64(cfg.seed, 7), reps, 10000000);
        double lo = 1e9, hi = -1e9;
        for (std::size_t j = 0; j < table.t.size(); ++j) {
            if (table.t[j] < 10.0 - 1e-9) continue;
            lo = std::min(lo, table.Uhat[j]);
            hi = std::max(hi, table.Uhat[j]);
        }
        const bool band_ok = lo >= 1.95 && hi <= 2.05;

        const auto small = renewal_U(model, 1.5, 0.02, RenewalMethod::branching_enumeration,
                                     mix64(cfg.seed, 71), cfg.quick ? 20000 : 40000, 10000000);
        const std::size_t j1 = 50;  // t = 1.0 on the 0.02 grid
        const double u1 = small.U[j1];
        const double series = reference::bst_renewal_U_series(1.0);
        const bool u1_ok = std::fabs(u1 - 3.44) <= 0.05;
        add(7, "renewal asymptotics: Uhat in [1.95,2.05] on [10,12]; U(1) ~ 3.44",
            band_ok && u1_ok,
            fmt("Uhat range [%.4f, %.4f]; U(1)=%.4f (series oracle %.4f)", lo, hi, u1, series));
    }

    void c8_vlem() {
        const auto model = preset("bst");
        const auto table = renewal_U(model, 12.0, 0.02, RenewalMethod::tilted_walk_mc,
                                     mix64(cfg.seed, 8), cfg.quick ? 30000 : 100000);
        const double v = vlem_integral(model, 12.0, table);
        const bool ok = std::fabs(v - (-2.0)) <= 0.1;
        add(8, "Vlem integral at x=12 near (s^2-m^2)/(2m^2) - 1/m = -2", ok,
            fmt("integral=%.4f target=-2.0 |err|=%.4f (<=0.1)", v, std::fabs(v + 2.0)));
    }

    void c9_overshoot() {
        const auto model = preset("bst");
        const std::int64_t reps = cfg.quick ? 150 : 400;
        const double gamma = 0.05;
        const auto h = overshoot_classes(model, 1000000, 1000.0, gamma, std::sqrt(0.05), reps,
                                         mix64(cfg.seed, 9));
        const double want = reference::bst_overshoot_mass(gamma);  // 0.1
        bool flat = true;
        double worst = 0.0, worst_se = 0.0;
        for (std::size_t c = 0; c < h.mass.size(); ++c) {
            const double err = std::fabs(h.mass[c] - want);
            if (err > 4.0 * h.se[c]) flat = false;
            if (err > worst) {
                worst = err;
                worst_se = h.se[c];
            }
        }
        const double cap = 4.0 + 4.0 * h.se_total;  // b/mu = 4 for bst
        const bool ok = flat && h.total_mass <= cap;
        add(9, "overshoot classes flat at 2*gamma and total <= b/mu", ok,
            fmt("classes=%zu worst |c-0.1|=%.4f (4se=%.4f); sum=%.3f cap=%.3f",
                h.mass.size(), worst, 4.0 * worst_se, h.total_mass, cap));
    }

    void c10_depth_clt() {
        const std::int64_t reps = cfg.quick ? 4000 : 10000;
        const double ks = depth_clt_check(preset("bst"), 100000, reps, mix64(cfg.seed, 10));
        add(10, "depth CLT: KS of normalized D_n vs N(0,1)", ks <= cfg.depth_ks_limit,
            fmt("KS=%.4f threshold=%.3f (pilot-pinned)", ks, cfg.depth_ks_limit));
    }

    void c11_equivalence() {
        const std::int64_t reps = 10000;
        const auto s = construction_equivalence_sample(200, preset("bst"), reps,
                                                       mix64(cfg.seed, 11));
        const double ks = ks_two_sample(s.recursive, s.incremental);
        const double crit = ks_two_sample_critical(0.01, reps, reps);
        add(11, "construction equivalence: recursive vs incremental Psi", ks < crit,
            fmt("two-sample KS=%.5f < 1%% critical %.5f", ks, crit));
    }

    void c12_lattice_oscillation() {
        if (cfg.quick) {
            add(12, "lattice oscillation of q(n)", true,
                "runs in the full suite only (about 5 minutes)", /*skipped=*/true);
            return;
        }
        const auto model = preset("lattice_example");
        const auto rep = lattice_oscillation(model, 4, 16000.0, 30000, mix64(cfg.seed, 12));
        // within-beta pairs must sit inside their own 4*SE; some cross-beta
        // pair must stick out beyond 4*SE
        bool within_ok = true;
        for (std::size_t a = 0; a < rep.cells.size(); ++a)
            for (std::size_t b = a + 1; b < rep.cells.size(); ++b) {
                const auto& x = rep.cells[a];
                const auto& y = rep.cells[b];
                if (std::fabs(x.beta - y.beta) > 1e-12) continue;
                const double se = std::sqrt(x.se * x.se + y.se * y.se);
                if (std::fabs(x.q_hat - y.q_hat) > 4.0 * se) within_ok = false;
            }
        const bool across_ok = rep.across_spread > 4.0 * rep.across_se;
        add(12, "lattice oscillation of q(n)", within_ok && across_ok,
            fmt("within spread=%.5f (4se=%.5f ok=%d); across spread=%.5f (4se=%.5f ok=%d)",
                rep.within_spread, 4.0 * rep.within_se, within_ok ? 1 : 0, rep.across_spread,
                4.0 * rep.across_se, across_ok ? 1 : 0));
    }

    void c13_trie_degenerate() {
        ExperimentConfig c;
        c.model = "trie:0.5,0.5";
        c.n_values = {100000};
        c.replicas = cfg.quick ? 600 : 2000;
        c.master_seed = mix64(cfg.seed, 13);
        const auto res = run(c);
        const auto& e = res.per_n[0];
        const double vn2 = e.var_psi / (1e5 * 1e5);
        add(13, "degenerate digital case: trie Var/n^2 vanishes", vn2 <= 0.01,
            fmt("Var/n^2=%.2e (<=0.01)", vn2));
    }

    void c14_invariants() {
        std::ostringstream d;
        bool ok = true;
        auto check = [&](bool cond, const std::string& what) {
            if (!cond) {
                ok = false;
                d << "FAILED: " << what << "; ";
            }
        };

        // conservation: children counts sum to n_u - s0 at every internal node
        {
            const std::int64_t n = cfg.quick ? 20000 : 50000;
            for (const char* mtext :
                 {"bst", "mary:3", "lattice_example", "trie:0.3,0.7", "quadtree:2"}) {
                const auto model = parse_model(mtext);
                for (int rep = 0; rep < 3; ++rep) {
                    const auto tree =
                        grow_size_tree(n, model, mix64(cfg.seed, 141, rep), false);
                    bool conserve = true;
                    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
                        const auto& nd = tree.nodes[i];
                        if (nd.num_children == 0) continue;
                        std::int64_t sum = 0;
                        for (std::int32_t c = 0; c < nd.num_children; ++c)
                            sum += tree.nodes[nd.first_child + c].count;
                        if (sum != nd.count - model.params.s0) conserve = false;
                    }
                    check(conserve, std::string("conservation ") + mtext);
                }
            }
            d << "conservation ok; ";
        }

        // Psi identity on item trees
        {
            for (const char* mtext : {"bst", "trie:0.5,0.5", "lattice_example", "mary:3"}) {
                const auto model = parse_model(mtext);
                const auto it = build_incremental(cfg.quick ? 300 : 800, model,
                                                  mix64(cfg.seed, 142));
                check(it.sum_item_depths() == it.path_length_items(),
                      std::string("Psi identity ") + mtext);
            }
            d << "Psi identity ok; ";
        }

        // determinism under parallelism
        {
            ExperimentConfig c;
            c.model = "bst";
            c.n_values = {20000};
            c.replicas = 200;
            c.master_seed = mix64(cfg.seed, 143);
            c.threads = 1;
            const auto r1 = run(c);
            c.threads = 4;
            const auto r2 = run(c);
            set_worker_threads(cfg.threads);
            check(r1.per_n[0].mean_psi == r2.per_n[0].mean_psi &&
                      r1.per_n[0].var_psi == r2.per_n[0].var_psi &&
                      r1.per_n[0].xn == r2.per_n[0].xn,
                  "thread-count determinism");
            d << "determinism ok; ";
        }

        // E[C] = 0 within the reported error bound
        {
            for (const char* mtext :
                 {"bst", "mary:3", "quadtree:2", "lattice_example", "trie:0.3,0.7"}) {
                const auto model = parse_model(mtext);
                const auto rep = constants_report(model);
                check(std::fabs(rep.mean_C) <= rep.error_bound + 1e-9,
                      std::string("E[C]=0 for ") + mtext);
                check(rep.contraction_factor < 1.0,
                      std::string("bE[V^2]<1 for ") + mtext);
            }
            d << "E[C]=0 ok; ";
        }

        // wasserstein2 metric axioms on random triples
        {
            RngStream rng(mix64(cfg.seed, 144));
            bool metric_ok = true;
            for (int t = 0; t < (cfg.quick ? 200 : 1000); ++t) {
                std::vector<double> a(64), b(64), c(64);
                for (auto& x : a) x = rng.normal();
                for (auto& x : b) x = 2.0 * rng.normal() + 1.0;
                for (auto& x : c) x = rng.u01() * 3.0 - 1.0;
                EmpiricalDistribution A{std::move(a)}, B{std::move(b)}, C{std::move(c)};
                const double ab = wasserstein2(A, B), ba = wasserstein2(B, A);
                const double ac = wasserstein2(A, C), cb = wasserstein2(C, B);
                if (ab != ba) metric_ok = false;
                if (ab > ac + cb + 1e-12) metric_ok = false;
                if (wasserstein2(A, A) != 0.0) metric_ok = false;
            }
            check(metric_ok, "wasserstein2 metric axioms");
            d << "metric axioms ok; ";
        }

        // concentration of n_v around n L_v at depth 8
        {
            for (const char* mtext : {"bst", "mary:3", "lattice_example"}) {
                const auto rows = concentration_check(parse_model(mtext), 1000000, 8,
                                                      {100.0, 1000.0, 10000.0},
                                                      cfg.quick ? 12 : 30,
                                                      mix64(cfg.seed, 145));
                for (const auto& r : rows)
                    check(r.frequency <= r.bound + 3.0 * r.se,
                          fmt("concentration %s x=%g freq=%.4f bound=%.4f", mtext, r.x,
                              r.frequency, r.bound));
            }
            d << "concentration ok; ";
        }

        // smoothness of the mean under adding K items
        {
            for (const char* mtext : {"bst", "mary:3", "lattice_example"}) {
                const auto rows = smoothness_check(parse_model(mtext), 10000, {1, 10, 100},
                                                   cfg.quick ? 200 : 400,
                                                   mix64(cfg.seed, 146));
                double prev = -1e18;
                for (const auto& r : rows) {
                    check(r.mean_diff >= -3.0 * r.se,
                          fmt("smoothness %s K=%lld nonnegative", mtext,
                              static_cast<long long>(r.k)));
                    check(r.mean_diff >= prev - 3.0 * r.se, "smoothness monotone in K");
                    const double cap_ratio =
                        (r.mean_diff + 3.0 * r.se) /
                        (static_cast<double>(r.k) * std::log(10000.0 + r.k));
                    check(cap_ratio <= cfg.smoothness_ratio_cap,
                          fmt("smoothness %s K=%lld ratio %.2f", mtext,
                              static_cast<long long>(r.k), cap_ratio));
                    prev = r.mean_diff;
                }
            }
            d << "smoothness ok";
        }

        add(14, "invariant suites", ok, d.str());
    }

    void run_suite() {
        set_worker_threads(cfg.threads);
        c1_small_n_mean();
        c2_c3_asymptotic_mean_and_variance();
        c4_fixpoint();
        c5_contraction();
        c6_limit_law();
        c7_renewal_uhat();
        c8_vlem();
        c9_overshoot();
        c10_depth_clt();
        c11_equivalence();
        c12_lattice_oscillation();
        c13_trie_degenerate();
        c14_invariants();
    }
};

}  // namespace

std::vector<CriterionResult> run_all(const Config& config, std::ostream& log) {
    log << "acceptance suite (" << (config.quick ? "quick" : "full")
        << "), seed=" << config.seed << "\n";
    Suite suite(config, log);
    suite.run_suite();
    return suite.results;
}

bool print_table(const std::vector<CriterionResult>& results, std::ostream& out) {
    bool all = true;
    out << "\n criterion                                                        result\n";
    out << " ----------------------------------------------------------------------\n";
    for (const auto& r : results) {
        char line[128];
        std::snprintf(line, sizeof line, " %2d %-60s %s", r.id, r.name.c_str(),
                      r.skipped ? "SKIPPED" : (r.pass ? "PASS" : "FAIL"));
        out << line << "\n";
        if (!r.skipped && !r.pass) all = false;
    }
    out << "\n";
    return all;
}

}  // namespace splitree::acceptance
