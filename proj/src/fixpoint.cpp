#include "splitree/fixpoint.hpp"

#include <algorithm>
#include <cmath>

#include "splitree/constants.hpp"
#include "splitree/parallel.hpp"

namespace splitree {

namespace {

constexpr std::uint64_t kApplyTag = 0x54617070;
constexpr std::uint64_t kIterTag = 0x46697850;
constexpr std::uint64_t kPairTag = 0x50616972;

// fills out[j] for j in [0, out) from per-index substreams
void apply_T_common(const std::vector<double>& input, const ModelSpec& model, double mu,
                    std::vector<double>& out, std::uint64_t seed) {
    const std::size_t m = input.size();
    const std::size_t chunk = 4096;
    const auto nchunks = static_cast<std::int64_t>((out.size() + chunk - 1) / chunk);
    parallel_for(nchunks, [&](std::int64_t c) {
        std::vector<double> v;
        const std::size_t lo = static_cast<std::size_t>(c) * chunk;
        const std::size_t hi = std::min(out.size(), lo + chunk);
        for (std::size_t j = lo; j < hi; ++j) {
            RngStream rng = RngStream::derived(seed, kApplyTag, j);
            model.draw(rng, v);
            double x = cost_C(v, mu);
            for (double vk : v) x += vk * input[rng.uniform_index(m)];
            out[j] = x;
        }
    });
    std::sort(out.begin(), out.end());
}

}  // namespace

EmpiricalDistribution apply_T(const EmpiricalDistribution& input, const ModelSpec& model,
                              double mu, std::size_t out_size, std::uint64_t seed) {
    if (input.size() == 0) throw std::invalid_argument("apply_T: empty input");
    if (!(mu > 0.0)) throw std::invalid_argument("apply_T: mu must be positive");
    std::vector<double> out(out_size);
    apply_T_common(input.samples(), model, mu, out, seed);
    return EmpiricalDistribution(std::move(out));
}

FixpointRun iterate_to_fixpoint(const ModelSpec& model, std::size_t n_samples, double tol,
                                int max_iter, std::uint64_t seed) {
    if (n_samples < 1000) throw std::invalid_argument("iterate_to_fixpoint: n_samples >= 1e3");
    if (!(tol > 0.0)) throw std::invalid_argument("iterate_to_fixpoint: tol > 0");
    const auto [mu, sigma2] = compute_mu_sigma(model);
    (void)sigma2;

    FixpointRun run;
    run.model_id = model.id();
    run.seed = seed;
    // point mass at 0 lies in the operator's mean-0 domain
    EmpiricalDistribution cur = EmpiricalDistribution::point_mass(0.0, n_samples);
    double prev_step = -1.0;
    for (int it = 0; it < max_iter; ++it) {
        EmpiricalDistribution next =
            apply_T(cur, model, mu, n_samples, mix64(seed, kIterTag, static_cast<std::uint64_t>(it)));
        // project back into the operator's mean-zero domain: resampling noise
        // otherwise sends the empirical mean on a random walk (sum V_k = 1)
        next = next.recentered();
        const double step = wasserstein2(cur, next);
        run.step_sizes.push_back(step);
        cur = std::move(next);
        run.iterations = it + 1;
        // Cauchy stop: the step is below tol and has stopped contracting
        // (a lone sub-tol step on the geometric decay is not evidence yet)
        if (step < tol && (prev_step < 0.0 || step >= 0.8 * prev_step)) {
            run.converged = true;
            break;
        }
        prev_step = step;
    }
    run.final_mean = cur.mean();
    run.final_variance = cur.variance();
    run.final_distribution = std::move(cur);
    return run;
}

FixpointRun quicksort_fixpoint(std::size_t n_samples, double tol, int max_iter,
                               std::uint64_t seed) {
    return iterate_to_fixpoint(preset("bst"), n_samples, tol, max_iter, seed);
}

ContractionReport check_contraction(const ModelSpec& model, int trials,
                                    std::size_t n_samples, std::uint64_t seed,
                                    PairFamily family) {
    if (trials < 1) throw std::invalid_argument("check_contraction: trials >= 1");
    const auto [mu, sigma2] = compute_mu_sigma(model);
    (void)sigma2;
    ContractionReport report;

    for (int t = 0; t < trials; ++t) {
        RngStream rng = RngStream::derived(seed, kPairTag, static_cast<std::uint64_t>(t));
        std::vector<double> x(n_samples), y(n_samples);
        const double scale = 0.5 + 1.5 * rng.u01();
        switch (family) {
            case PairFamily::scaled_normal:
                for (auto& v : x) v = rng.normal();
                for (std::size_t i = 0; i < n_samples; ++i) y[i] = scale * x[i];
                break;
            case PairFamily::scaled_uniform:
                for (auto& v : x) v = 3.4641016151377544 * (rng.u01() - 0.5);
                for (std::size_t i = 0; i < n_samples; ++i) y[i] = scale * x[i];
                break;
            case PairFamily::normal_vs_uniform:
                for (auto& v : x) v = rng.normal();
                for (auto& v : y) v = 3.4641016151377544 * (rng.u01() - 0.5);
                break;
        }
        // center both (the operator's domain is the mean-0 subspace)
        double mx = 0.0, my = 0.0;
        for (double v : x) mx += v;
        for (double v : y) my += v;
        mx /= static_cast<double>(n_samples);
        my /= static_cast<double>(n_samples);
        for (auto& v : x) v -= mx;
        for (auto& v : y) v -= my;

        EmpiricalDistribution phi{std::vector<double>(x)};
        EmpiricalDistribution psi{std::vector<double>(y)};
        const double din = wasserstein2(phi, psi);
        if (din < 1e-12) {
            ++report.skipped_degenerate;
            continue;
        }
        // common random numbers: same coefficient seed for both laws
        const std::uint64_t cseed = mix64(seed, 0xC0FFEE, static_cast<std::uint64_t>(t));
        std::vector<double> tx(n_samples), ty(n_samples);
        apply_T_common(phi.samples(), model, mu, tx, cseed);
        apply_T_common(psi.samples(), model, mu, ty, cseed);
        const double dout =
            wasserstein2(EmpiricalDistribution(std::move(tx)), EmpiricalDistribution(std::move(ty)));
        ContractionRecord rec;
        rec.d2_in = din;
        rec.d2_out = dout;
        rec.ratio_sq = (dout / din) * (dout / din);
        report.records.push_back(rec);
    }
    return report;
}

}  // namespace splitree
