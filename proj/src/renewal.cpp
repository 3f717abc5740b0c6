#include "splitree/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "splitree/constants.hpp"
#include "splitree/parallel.hpp"
#include "splitree/tree.hpp"

namespace splitree {

namespace {

constexpr std::uint64_t kWalkTag = 0x57616c6b;
constexpr std::uint64_t kNuTag = 0x4e754364;
constexpr std::uint64_t kOverTag = 0x4f766572;
constexpr std::uint64_t kTopTag = 0x546f7043;

std::vector<double> make_grid(double t_max, double step) {
    std::vector<double> t;
    for (double x = 0.0; x <= t_max + 1e-12; x += step) t.push_back(x);
    return t;
}

// x -> P(-ln V <= x); exact when the model provides it, otherwise an
// empirical CDF from a large fixed-seed sample of uniform components.
std::function<double(double)> neg_log_cdf(const ModelSpec& model, std::uint64_t seed) {
    if (model.neg_log_component_cdf) return model.neg_log_component_cdf;
    auto samples = std::make_shared<std::vector<double>>();
    constexpr int kDraws = 1000000;
    samples->reserve(kDraws);
    RngStream rng = RngStream::derived(seed, kNuTag);
    std::vector<double> buf;
    for (int i = 0; i < kDraws; ++i) {
        const double v = uniform_component(model, rng, buf);
        if (v > 0.0) samples->push_back(-std::log(v));
        // v == 0 contributes to no finite threshold; dividing by kDraws below
        // keeps the defective mass out
    }
    std::sort(samples->begin(), samples->end());
    return [samples](double x) {
        const auto it = std::upper_bound(samples->begin(), samples->end(), x);
        return static_cast<double>(it - samples->begin()) / static_cast<double>(kDraws);
    };
}

}  // namespace

double size_biased_increment(const ModelSpec& model, RngStream& rng,
                             std::vector<double>& buf) {
    model.draw(rng, buf);
    const double u = rng.u01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < buf.size(); ++i) {
        acc += buf[i];
        if (u < acc) return -std::log(buf[i]);
    }
    return -std::log(buf.back());
}

RenewalTable renewal_U(const ModelSpec& model, double t_max, double grid_step,
                       RenewalMethod method, std::uint64_t seed, std::int64_t replicas,
                       std::int64_t node_budget) {
    if (!(grid_step > 0.0)) throw ConfigError("renewal_U: grid_step > 0 required");
    if (grid_step > 0.5) throw ConfigError("renewal_U: grid too coarse (step > 0.5)");
    if (replicas < 1) throw ConfigError("renewal_U: replicas >= 1");
    if (method == RenewalMethod::branching_enumeration && t_max > 16.0)
        throw ConfigError("renewal_U: t_max <= 16 for branching enumeration");

    RenewalTable table;
    table.t = make_grid(t_max, grid_step);
    table.method = method;
    table.replicas = replicas;
    const std::size_t npts = table.t.size();

    // per-replica accumulation slab, reduced afterwards (order independent)
    std::vector<double> slab(static_cast<std::size_t>(replicas) * npts, 0.0);

    if (method == RenewalMethod::branching_enumeration) {
        parallel_for(replicas, [&](std::int64_t r) {
            RngStream rng = RngStream::derived(seed, kWalkTag, static_cast<std::uint64_t>(r));
            std::vector<double> buf;
            std::vector<double> stack{0.0};
            std::vector<std::int64_t> hist(npts, 0);
            std::int64_t local_nodes = 0;
            while (!stack.empty()) {
                const double s = stack.back();
                stack.pop_back();
                model.draw(rng, buf);
                for (double v : buf) {
                    if (v <= 0.0) continue;
                    const double sc = s - std::log(v);
                    if (sc > t_max) continue;
                    hist[static_cast<std::size_t>(sc / grid_step)] += 1;
                    stack.push_back(sc);
                    if (++local_nodes > node_budget / replicas)
                        throw BudgetError("renewal_U: node budget exceeded");
                }
            }
            // cumulative counts: U_r(t_j) = #{S <= t_j}; cell i holds
            // S in [t_i, t_{i+1})
            double acc = 0.0;
            double* row = slab.data() + static_cast<std::size_t>(r) * npts;
            row[0] = 0.0;
            for (std::size_t j = 1; j < npts; ++j) {
                acc += static_cast<double>(hist[j - 1]);
                row[j] = acc;
            }
        });
    } else {
        const auto nu_cdf = neg_log_cdf(model, seed);
        const int b = model.params.b;
        parallel_for(replicas, [&](std::int64_t r) {
            RngStream rng = RngStream::derived(seed, kWalkTag, static_cast<std::uint64_t>(r));
            std::vector<double> buf;
            double* row = slab.data() + static_cast<std::size_t>(r) * npts;
            double s = 0.0;
            while (s <= t_max) {
                // S_n contributes nuhat(t - S_n) = e^{-(t-S_n)} nu(t-S_n) for
                // every grid t >= S_n
                const auto j0 = static_cast<std::size_t>(std::ceil(s / grid_step - 1e-12));
                for (std::size_t j = j0; j < npts; ++j) {
                    const double x = table.t[j] - s;
                    row[j] += std::exp(-x) * b * nu_cdf(x);
                }
                s += size_biased_increment(model, rng, buf);
            }
        });
    }

    table.U.assign(npts, 0.0);
    table.Uhat.assign(npts, 0.0);
    table.se_Uhat.assign(npts, 0.0);
    for (std::size_t j = 0; j < npts; ++j) {
        double sum = 0.0, sumsq = 0.0;
        for (std::int64_t r = 0; r < replicas; ++r) {
            const double x = slab[static_cast<std::size_t>(r) * npts + j];
            sum += x;
            sumsq += x * x;
        }
        const double nrep = static_cast<double>(replicas);
        const double mean = sum / nrep;
        const double var = std::max(0.0, sumsq / nrep - mean * mean);
        if (method == RenewalMethod::branching_enumeration) {
            table.U[j] = mean;
            table.Uhat[j] = mean * std::exp(-table.t[j]);
            table.se_Uhat[j] = std::exp(-table.t[j]) * std::sqrt(var / nrep);
        } else {
            table.Uhat[j] = mean;
            table.U[j] = mean * std::exp(table.t[j]);
            table.se_Uhat[j] = std::sqrt(var / nrep);
        }
    }
    return table;
}

double vlem_integral(const ModelSpec& model, double x, const RenewalTable& table) {
    if (x < 0.0) throw ConfigError("vlem_integral: x >= 0 required");
    if (x == 0.0) return 0.0;
    if (table.t.size() < 2) throw ConfigError("vlem_integral: table too small");
    const double step = table.t[1] - table.t[0];
    if (step > 0.05 + 1e-12) throw ConfigError("vlem_integral: grid step must be <= 0.05");
    if (table.t.back() + 1e-9 < x) throw ConfigError("vlem_integral: table does not cover x");
    const auto [mu, sigma2] = compute_mu_sigma(model);
    (void)sigma2;
    const double inv_mu = 1.0 / mu;
    double acc = 0.0;
    for (std::size_t j = 1; j < table.t.size() && table.t[j] <= x + 1e-12; ++j) {
        const double f0 = table.Uhat[j - 1] - inv_mu;
        const double f1 = table.Uhat[j] - inv_mu;
        acc += 0.5 * (f0 + f1) * (table.t[j] - table.t[j - 1]);
    }
    return acc;
}

OvershootHistogram overshoot_classes(const ModelSpec& model, std::int64_t n, double B,
                                     double gamma, double eps, std::int64_t replicas,
                                     std::uint64_t seed, std::int64_t node_budget) {
    if (static_cast<double>(n) / B < 100.0)
        throw ConfigError("overshoot_classes: n/B >= 100 required");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("overshoot_classes: gamma in (0,1)");
    if (!(eps * eps < 1.0)) throw ConfigError("overshoot_classes: eps^2 < 1 required");
    if (replicas < 2) throw ConfigError("overshoot_classes: replicas >= 2");

    const double eps2 = eps * eps;
    const auto nclasses =
        static_cast<std::size_t>(std::floor((1.0 - eps2) / gamma + 1e-9)) + 1;
    OvershootHistogram h;
    h.n = n;
    h.B = B;
    h.gamma = gamma;
    h.eps = eps;
    h.replicas = replicas;
    h.alpha.resize(nclasses);
    for (std::size_t c = 0; c < nclasses; ++c) h.alpha[c] = 1.0 - static_cast<double>(c) * gamma;

    std::vector<double> slab(static_cast<std::size_t>(replicas) * nclasses, 0.0);
    const double lowest = h.alpha.back() - gamma;
    parallel_for(replicas, [&](std::int64_t r) {
        RngStream rng = RngStream::derived(seed, kOverTag, static_cast<std::uint64_t>(r));
        std::vector<double> buf;
        std::vector<double> stack;
        double* row = slab.data() + static_cast<std::size_t>(r) * nclasses;
        if (static_cast<double>(n) < B) {
            // the root itself is the single fringe root (vacuously: no strict
            // ancestors); unreachable under the n/B >= 100 contract
            const double x = static_cast<double>(n) / B;
            if (x >= lowest) {
                const auto c =
                    static_cast<std::int64_t>(std::ceil((1.0 - x) / gamma - 1e-12)) - 1;
                if (c >= 0 && c < static_cast<std::int64_t>(nclasses)) row[c] += 1.0;
            }
            return;
        }
        stack.push_back(1.0);
        std::int64_t local = 0;
        while (!stack.empty()) {
            const double L = stack.back();
            stack.pop_back();
            model.draw(rng, buf);
            for (double v : buf) {
                const double Lc = L * v;
                const double x = static_cast<double>(n) * Lc / B;
                if (x >= 1.0) {
                    stack.push_back(Lc);
                    if (++local > node_budget / replicas)
                        throw BudgetError("overshoot_classes: node budget exceeded");
                    continue;
                }
                // fringe root; bin nL_r/B into [alpha-gamma, alpha)
                if (x < lowest) continue;
                const auto c =
                    static_cast<std::int64_t>(std::ceil((1.0 - x) / gamma - 1e-12)) - 1;
                if (c >= 0 && c < static_cast<std::int64_t>(nclasses)) row[c] += 1.0;
            }
        }
    });

    h.mass.assign(nclasses, 0.0);
    h.se.assign(nclasses, 0.0);
    const double scale = static_cast<double>(n) / B;
    const double nrep = static_cast<double>(replicas);
    double tot = 0.0, tot_var = 0.0;
    for (std::size_t c = 0; c < nclasses; ++c) {
        double sum = 0.0, sumsq = 0.0;
        for (std::int64_t r = 0; r < replicas; ++r) {
            const double x = slab[static_cast<std::size_t>(r) * nclasses + c] / scale;
            sum += x;
            sumsq += x * x;
        }
        const double mean = sum / nrep;
        const double var = std::max(0.0, sumsq / nrep - mean * mean);
        h.mass[c] = mean;
        h.se[c] = std::sqrt(var / nrep);
        tot += mean;
    }
    // SE of the total from per-replica totals
    for (std::int64_t r = 0; r < replicas; ++r) {
        double t = 0.0;
        for (std::size_t c = 0; c < nclasses; ++c)
            t += slab[static_cast<std::size_t>(r) * nclasses + c] / scale;
        tot_var += (t - tot) * (t - tot);
    }
    h.total_mass = tot;
    h.se_total = std::sqrt(tot_var / nrep / nrep);
    return h;
}

std::pair<double, double> top_contribution(const ModelSpec& model, std::int64_t n, double B,
                                           std::int64_t replicas, std::uint64_t seed) {
    if (replicas < 2) throw ConfigError("top_contribution: replicas >= 2");
    if (!(B > 0.0)) throw ConfigError("top_contribution: B > 0 required");
    const SplitParams& p = model.params;
    std::vector<double> totals(replicas, 0.0);
    parallel_for(replicas, [&](std::int64_t r) {
        RngStream rng = RngStream::derived(seed, kTopTag, static_cast<std::uint64_t>(r));
        std::vector<double> buf;
        std::vector<std::int64_t> counts;
        struct Frame {
            std::int64_t count;
            double L;
        };
        std::vector<Frame> stack;
        double acc = 0.0;
        if (static_cast<double>(n) * 1.0 >= B && n > p.s) stack.push_back({n, 1.0});
        while (!stack.empty()) {
            const auto [count, L] = stack.back();
            stack.pop_back();
            model.draw(rng, buf);
            const std::int64_t trials = count - p.s0 - static_cast<std::int64_t>(p.b) * p.s1;
            multinomial(rng, trials, buf, counts);
            for (int slot = 0; slot < p.b; ++slot) {
                const std::int64_t c = counts[slot] + p.s1;
                if (c == 0) continue;
                const double Lc = L * buf[slot];
                if (static_cast<double>(n) * Lc < B) continue;  // below the cut
                acc += static_cast<double>(c);
                if (c > p.s) stack.push_back({c, Lc});
            }
        }
        totals[r] = acc;
    });
    double sum = 0.0, sumsq = 0.0;
    for (double x : totals) {
        sum += x;
        sumsq += x * x;
    }
    const double nrep = static_cast<double>(replicas);
    const double mean = sum / nrep;
    const double var = std::max(0.0, sumsq / nrep - mean * mean);
    return {mean, std::sqrt(var / nrep)};
}

}  // namespace splitree
