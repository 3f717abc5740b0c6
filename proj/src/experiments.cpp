#include "splitree/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>

#include "splitree/constants.hpp"
#include "splitree/io.hpp"
#include "splitree/parallel.hpp"
#include "splitree/tree.hpp"
#include "splitree/version.hpp"

namespace splitree {

namespace {

constexpr std::uint64_t kDepthTag = 0xDe;
constexpr std::uint64_t kSmoothTag = 0x5311;

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += x;
    const double mean = s / n;
    double v = 0.0;
    for (double x : xs) v += (x - mean) * (x - mean);
    return {mean, std::sqrt(v / n / n)};
}

// population variance plus the SE of the variance estimator
std::pair<double, double> var_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += x;
    const double mean = s / n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    return {m2, std::sqrt(std::max(0.0, m4 - m2 * m2) / n)};
}

std::string utc_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (replicas < 2) throw ConfigError("ExperimentConfig: replicas >= 2 required");
    if (n_values.empty()) throw ConfigError("ExperimentConfig: no n values");
    for (std::size_t i = 0; i + 1 < n_values.size(); ++i)
        if (n_values[i] >= n_values[i + 1])
            throw ConfigError("ExperimentConfig: n values must be ascending and distinct");
    if (n_values.front() < 0) throw ConfigError("ExperimentConfig: n >= 0");
    std::int64_t total = 0;
    for (auto n : n_values) total += n * replicas;
    if (total > item_budget)
        throw BudgetError("ExperimentConfig: item budget exceeded (" + std::to_string(total) +
                          " > " + std::to_string(item_budget) + ")");
}

ExperimentResult run(const ExperimentConfig& config) {
    config.validate();
    const ModelSpec model = parse_model(config.model);
    if (config.threads > 0) set_worker_threads(config.threads);
    const auto [mu, sigma2] = compute_mu_sigma(model);
    (void)sigma2;

    ExperimentResult result;
    result.config = config;
    result.mu = mu;
    result.timestamp = utc_timestamp();
    result.code_version = kVersion;

    for (const auto n : config.n_values) {
        PerNEstimates est;
        est.n = n;
        std::vector<double> psi(config.replicas), upsilon, nodes, depths;
        if (config.measures.upsilon) upsilon.resize(config.replicas);
        if (config.measures.node_count) nodes.resize(config.replicas);
        if (config.measures.depth_last && n >= 1) depths.resize(config.replicas);

        parallel_for(config.replicas, [&](std::int64_t r) {
            thread_local TreeWorkspace ws;
            const std::uint64_t seed =
                mix64(config.master_seed, static_cast<std::uint64_t>(n),
                      static_cast<std::uint64_t>(r));
            grow_size_tree_into(ws, n, model, seed, config.measures.annotate_lengths);
            psi[r] = static_cast<double>(path_length_items(ws.tree));
            if (config.measures.upsilon)
                upsilon[r] = static_cast<double>(path_length_nodes(ws.tree));
            if (config.measures.node_count)
                nodes[r] = static_cast<double>(ws.tree.nodes.size());
            if (config.measures.depth_last && n >= 1)
                depths[r] = sample_last_depth(n, model, mix64(seed, kDepthTag));
        });

        const auto ms = mean_se(psi);
        est.mean_psi = ms.mean;
        est.se_psi = ms.se;
        const auto vs = var_se(psi);
        est.var_psi = vs.first;
        est.se_var_psi = vs.second;
        if (config.measures.upsilon) {
            const auto us = mean_se(upsilon);
            est.mean_upsilon = us.mean;
            est.se_upsilon = us.se;
        }
        if (config.measures.node_count) {
            const auto ns_ = mean_se(nodes);
            est.mean_nodes = ns_.mean;
            est.se_nodes = ns_.se;
        }
        if (n >= 1) {
            est.q_hat = est.mean_psi / static_cast<double>(n) -
                        std::log(static_cast<double>(n)) / mu;
            est.se_q = est.se_psi / static_cast<double>(n);
        }
        est.xn.resize(config.replicas);
        for (std::int64_t r = 0; r < config.replicas; ++r)
            est.xn[r] = n >= 1 ? (psi[r] - est.mean_psi) / static_cast<double>(n) : 0.0;
        est.depth_last = std::move(depths);
        result.per_n.push_back(std::move(est));
    }

    if (!config.output_dir.empty()) persist_experiment(result);
    return result;
}

MeanAsymptoticsReport check_mean_asymptotics(const ModelSpec& model,
                                             const ExperimentResult& result) {
    if (result.per_n.size() < 3)
        throw ConfigError("check_mean_asymptotics: need >= 3 n values");
    const double span = static_cast<double>(result.per_n.back().n) /
                        static_cast<double>(result.per_n.front().n);
    if (span < 4.0)
        throw ConfigError("check_mean_asymptotics: n values must span >= 2 octaves");

    MeanAsymptoticsReport rep;
    for (const auto& e : result.per_n) {
        rep.q_hats.push_back(e.q_hat);
        rep.q_ses.push_back(e.se_q);
    }
    const auto& top = result.per_n[result.per_n.size() - 1];
    const auto& prev = result.per_n[result.per_n.size() - 2];
    rep.cauchy_gap = std::fabs(top.q_hat - prev.q_hat);
    rep.cauchy_threshold =
        4.0 * std::sqrt(top.se_q * top.se_q + prev.se_q * prev.se_q) + 0.05;
    rep.cauchy_ok = rep.cauchy_gap <= rep.cauchy_threshold;

    if (model.name == "bst") {
        // exact second-order expansion: q(n) = 2*gamma - 4 + (2 ln n + 2 gamma + 1)/n
        constexpr double kEuler = 0.57721566490153286;
        const double n = static_cast<double>(top.n);
        const double q_exact =
            2.0 * kEuler - 4.0 + (2.0 * std::log(n) + 2.0 * kEuler + 1.0) / n;
        rep.bst_abs_err = std::fabs(top.q_hat - q_exact);
        rep.bst_threshold = 4.0 * top.se_q + 0.002;
    }
    return rep;
}

OscillationReport lattice_oscillation(const ModelSpec& model, int beta_points,
                                      double n_scale, std::int64_t replicas,
                                      std::uint64_t master_seed) {
    const double d = model.lattice_span;
    if (!(d > 0.0)) throw ConfigError("lattice_oscillation: model has lattice span d = 0");
    if (beta_points < 2) throw ConfigError("lattice_oscillation: beta_points >= 2");

    const auto [mu, sigma2] = compute_mu_sigma(model);
    (void)sigma2;
    OscillationReport rep;
    for (int bi = 0; bi < beta_points; ++bi) {
        const double beta = d * static_cast<double>(bi) / static_cast<double>(beta_points);
        const auto jlo =
            static_cast<std::int64_t>(std::ceil((std::log(n_scale) - beta) / d - 1e-9));
        for (std::int64_t j = jlo;; ++j) {
            const auto n = static_cast<std::int64_t>(
                std::llround(std::exp(static_cast<double>(j) * d + beta)));
            if (static_cast<double>(n) > n_scale * std::exp(2.0 * d) + 0.5) break;
            ExperimentConfig cfg;
            cfg.model = model.spec_text;
            cfg.n_values = {n};
            cfg.replicas = replicas;
            cfg.master_seed = master_seed;
            auto res = run(cfg);
            OscillationCell cell;
            cell.beta = beta;
            cell.j = j;
            cell.n = n;
            cell.q_hat = res.per_n[0].q_hat;
            cell.se = res.per_n[0].se_q;
            rep.cells.push_back(cell);
        }
    }

    // within-beta spread: widest same-beta gap
    for (int bi = 0; bi < beta_points; ++bi) {
        const double beta = d * static_cast<double>(bi) / static_cast<double>(beta_points);
        std::vector<const OscillationCell*> cells;
        for (const auto& c : rep.cells)
            if (std::fabs(c.beta - beta) < 1e-12) cells.push_back(&c);
        for (std::size_t a = 0; a < cells.size(); ++a)
            for (std::size_t b = a + 1; b < cells.size(); ++b) {
                const double gap = std::fabs(cells[a]->q_hat - cells[b]->q_hat);
                if (gap > rep.within_spread) {
                    rep.within_spread = gap;
                    rep.within_se =
                        std::sqrt(cells[a]->se * cells[a]->se + cells[b]->se * cells[b]->se);
                }
            }
    }
    // across-beta spread: same-j, different-beta gaps
    for (const auto& a : rep.cells)
        for (const auto& b : rep.cells) {
            if (a.j != b.j || a.beta >= b.beta) continue;
            const double gap = std::fabs(a.q_hat - b.q_hat);
            if (gap > rep.across_spread) {
                rep.across_spread = gap;
                rep.across_se = std::sqrt(a.se * a.se + b.se * b.se);
            }
        }
    return rep;
}

LimitLawReport check_limit_law(const ModelSpec& model, std::int64_t n,
                               std::int64_t replicas, const FixpointRun& fixpoint,
                               std::uint64_t master_seed) {
    if (!fixpoint.converged) throw ConfigError("check_limit_law: fixpoint did not converge");
    if (static_cast<std::size_t>(replicas) != fixpoint.final_distribution.size())
        throw ConfigError("check_limit_law: replicas must equal the fixpoint sample size");
    ExperimentConfig cfg;
    cfg.model = model.spec_text;
    cfg.n_values = {n};
    cfg.replicas = replicas;
    cfg.master_seed = master_seed;
    const auto res = run(cfg);
    LimitLawReport rep;
    EmpiricalDistribution xn{std::vector<double>(res.per_n[0].xn)};
    rep.w2 = wasserstein2(xn, fixpoint.final_distribution);
    rep.ks = ks_two_sample(xn.samples(), fixpoint.final_distribution.samples());
    return rep;
}

double depth_clt_check(const ModelSpec& model, std::int64_t n, std::int64_t replicas,
                       std::uint64_t master_seed) {
    const auto [mu, sigma2] = compute_mu_sigma(model);
    if (sigma2 <= 1e-12)
        throw ConfigError("depth_clt_check: model is monoatomic (sigma^2 = 0)");
    if (n < 2 || replicas < 2) throw ConfigError("depth_clt_check: n, replicas too small");
    const double ln_n = std::log(static_cast<double>(n));
    const double center = ln_n / mu;
    const double scale = std::sqrt(sigma2 * ln_n / (mu * mu * mu));
    std::vector<double> z(replicas);
    parallel_for(replicas, [&](std::int64_t r) {
        const std::uint64_t seed = mix64(master_seed, static_cast<std::uint64_t>(n),
                                         static_cast<std::uint64_t>(r));
        z[r] = (sample_last_depth(n, model, mix64(seed, kDepthTag)) - center) / scale;
    });
    return ks_to_standard_normal(std::move(z));
}

std::vector<SmoothnessRow> smoothness_check(const ModelSpec& model, std::int64_t n,
                                            const std::vector<std::int64_t>& k_values,
                                            std::int64_t replicas,
                                            std::uint64_t master_seed) {
    if (n < 100) throw ConfigError("smoothness_check: n >= 100");
    if (replicas < 2) throw ConfigError("smoothness_check: replicas >= 2");
    std::vector<SmoothnessRow> rows;
    for (const auto k : k_values) {
        std::vector<double> diff(replicas);
        parallel_for(replicas, [&](std::int64_t r) {
            thread_local TreeWorkspace ws;
            // shared seed across both sizes: the per-node substreams couple
            // the trees, and the quantile coupling makes Psi monotone in n
            const std::uint64_t seed =
                mix64(master_seed, kSmoothTag, static_cast<std::uint64_t>(r));
            grow_size_tree_into(ws, n + k, model, seed);
            const double big =
                static_cast<double>(path_length_items(ws.tree) + n + k);
            grow_size_tree_into(ws, n, model, seed);
            const double small = static_cast<double>(path_length_items(ws.tree) + n);
            diff[r] = big - small;
        });
        const auto ms = mean_se(diff);
        SmoothnessRow row;
        row.k = k;
        row.mean_diff = ms.mean;
        row.se = ms.se;
        row.ratio = k > 0 ? ms.mean / (static_cast<double>(k) *
                                       std::log(static_cast<double>(n + k)))
                          : 0.0;
        rows.push_back(row);
    }
    return rows;
}

UpsilonReport upsilon_corollary_check(const ModelSpec& model,
                                      const std::vector<std::int64_t>& n_values,
                                      std::int64_t replicas, std::uint64_t master_seed) {
    if (model.lattice_span > 0.0)
        throw ConfigError("upsilon_corollary_check: corollary is stated for nonlattice models");
    ExperimentConfig cfg;
    cfg.model = model.spec_text;
    cfg.n_values = n_values;
    cfg.replicas = replicas;
    cfg.master_seed = master_seed;
    cfg.measures.upsilon = true;
    cfg.measures.node_count = true;
    const auto res = run(cfg);

    UpsilonReport rep;
    const auto& top = res.per_n.back();
    rep.alpha_hat = top.mean_nodes / static_cast<double>(top.n);
    rep.alpha_se = top.se_nodes / static_cast<double>(top.n);
    for (const auto& e : res.per_n) {
        const double n = static_cast<double>(e.n);
        rep.q_upsilon.push_back(e.mean_upsilon / n - rep.alpha_hat * std::log(n) / res.mu);
        rep.q_se.push_back(e.se_upsilon / n + rep.alpha_se * std::log(n) / res.mu);
    }
    const std::size_t m = rep.q_upsilon.size();
    if (m >= 2) {
        rep.cauchy_gap = std::fabs(rep.q_upsilon[m - 1] - rep.q_upsilon[m - 2]);
        rep.cauchy_threshold =
            4.0 * std::sqrt(rep.q_se[m - 1] * rep.q_se[m - 1] +
                            rep.q_se[m - 2] * rep.q_se[m - 2]) +
            0.05;
        rep.cauchy_ok = rep.cauchy_gap <= rep.cauchy_threshold;
    }
    return rep;
}

std::vector<ConcentrationRow> concentration_check(const ModelSpec& model, std::int64_t n,
                                                  int depth,
                                                  const std::vector<double>& x_values,
                                                  std::int64_t replicas,
                                                  std::uint64_t master_seed) {
    if (replicas < 2) throw ConfigError("concentration_check: replicas >= 2");
    std::vector<std::vector<std::int64_t>> eligible(replicas,
                                                    std::vector<std::int64_t>(x_values.size()));
    std::vector<std::vector<std::int64_t>> violations(
        replicas, std::vector<std::int64_t>(x_values.size()));

    parallel_for(replicas, [&](std::int64_t r) {
        thread_local TreeWorkspace ws;
        const std::uint64_t seed = mix64(master_seed, static_cast<std::uint64_t>(n),
                                         static_cast<std::uint64_t>(r));
        grow_size_tree_into(ws, n, model, seed, /*annotate=*/true);
        // depths via a forward sweep (children appear after their parent)
        const auto& nodes = ws.tree.nodes;
        std::vector<std::int32_t> dep(nodes.size(), 0);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::int32_t c = 0; c < nodes[i].num_children; ++c)
                dep[nodes[i].first_child + c] = dep[i] + 1;
            if (dep[i] != depth) continue;
            const double nl = static_cast<double>(n) * ws.tree.lengths[i];
            const double dev =
                std::fabs(static_cast<double>(nodes[i].count) - nl);
            const bool violated = dev > std::pow(nl, 2.0 / 3.0);
            for (std::size_t xi = 0; xi < x_values.size(); ++xi) {
                if (nl > x_values[xi]) {
                    eligible[r][xi] += 1;
                    if (violated) violations[r][xi] += 1;
                }
            }
        }
    });

    std::vector<ConcentrationRow> rows;
    for (std::size_t xi = 0; xi < x_values.size(); ++xi) {
        ConcentrationRow row;
        row.x = x_values[xi];
        row.bound = std::pow(x_values[xi], -0.25);
        std::vector<double> freqs;
        for (std::int64_t r = 0; r < replicas; ++r) {
            row.eligible += eligible[r][xi];
            row.violations += violations[r][xi];
            if (eligible[r][xi] > 0)
                freqs.push_back(static_cast<double>(violations[r][xi]) /
                                static_cast<double>(eligible[r][xi]));
        }
        if (row.eligible > 0) {
            row.frequency =
                static_cast<double>(row.violations) / static_cast<double>(row.eligible);
            if (freqs.size() >= 2) {
                const auto ms = mean_se(freqs);
                row.se = ms.se;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace splitree
