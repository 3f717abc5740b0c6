#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "splitree/fixpoint.hpp"
#include "splitree/model.hpp"

namespace splitree {

struct MeasureFlags {
    bool psi = true;
    bool upsilon = false;
    bool node_count = false;
    bool depth_last = false;
    bool annotate_lengths = false;
};

struct ExperimentConfig {
    std::string model;  // preset text, e.g. "bst" or "trie:0.5,0.5"
    std::vector<std::int64_t> n_values;
    std::int64_t replicas = 0;
    std::uint64_t master_seed = 1;
    MeasureFlags measures;
    std::string output_dir;  // empty = no persistence
    int threads = 0;
    std::int64_t item_budget = 10000000000LL;

    void validate() const;
};

struct PerNEstimates {
    std::int64_t n = 0;
    double mean_psi = 0.0, se_psi = 0.0;
    double var_psi = 0.0, se_var_psi = 0.0;
    double mean_upsilon = 0.0, se_upsilon = 0.0;
    double mean_nodes = 0.0, se_nodes = 0.0;
    double q_hat = 0.0, se_q = 0.0;  // mean_psi/n - ln(n)/mu
    std::vector<double> xn;          // centered (psi - mean)/n, one per replica
    std::vector<double> depth_last;  // present iff measured
    std::string sample_file;         // relative path when persisted
};

struct ExperimentResult {
    ExperimentConfig config;
    double mu = 0.0;
    std::vector<PerNEstimates> per_n;
    std::string timestamp;
    std::string code_version;
};

ExperimentResult run(const ExperimentConfig& config);

struct MeanAsymptoticsReport {
    std::vector<double> q_hats;
    std::vector<double> q_ses;
    double cauchy_gap = 0.0;       // |q(n_top) - q(n_prev)|
    double cauchy_threshold = 0.0; // 4*combined SE + 0.05
    bool cauchy_ok = false;
    // filled for bst: comparison against the exact second-order constant
    std::optional<double> bst_abs_err;
    std::optional<double> bst_threshold;
};
MeanAsymptoticsReport check_mean_asymptotics(const ModelSpec& model,
                                             const ExperimentResult& result);

struct OscillationCell {
    double beta = 0.0;
    std::int64_t j = 0;
    std::int64_t n = 0;
    double q_hat = 0.0;
    double se = 0.0;
};
struct OscillationReport {
    std::vector<OscillationCell> cells;
    double within_spread = 0.0;   // max over beta of the same-beta q range
    double within_se = 0.0;       // combined SE of the attaining pair
    double across_spread = 0.0;   // max over j of the cross-beta q range
    double across_se = 0.0;
};
// q-hat per (beta, j) cell with n(beta, j) = round(exp(j d + beta)) and
// n in [n_scale, n_scale e^{2d}]. Rejects d = 0 models.
OscillationReport lattice_oscillation(const ModelSpec& model, int beta_points,
                                      double n_scale, std::int64_t replicas,
                                      std::uint64_t master_seed);

struct LimitLawReport {
    double w2 = 0.0;
    double ks = 0.0;
};
// Distance between centered X_n samples and a converged fixed-point sample
// (sizes must match; thin the fixpoint sample if needed).
LimitLawReport check_limit_law(const ModelSpec& model, std::int64_t n,
                               std::int64_t replicas, const FixpointRun& fixpoint,
                               std::uint64_t master_seed);

// KS distance of (D_n - ln n / mu)/sqrt(sigma^2 mu^-3 ln n) to the standard
// normal. Rejects monoatomic models (sigma = 0).
double depth_clt_check(const ModelSpec& model, std::int64_t n, std::int64_t replicas,
                       std::uint64_t master_seed);

struct SmoothnessRow {
    std::int64_t k = 0;
    double mean_diff = 0.0;  // paired E[Psi~(n+K)] - E[Psi~(n)]
    double se = 0.0;
    double ratio = 0.0;      // mean_diff / (K ln(n+K))
};
// Paired-coupling estimate of the mean increment when K items are added.
std::vector<SmoothnessRow> smoothness_check(const ModelSpec& model, std::int64_t n,
                                            const std::vector<std::int64_t>& k_values,
                                            std::int64_t replicas, std::uint64_t master_seed);

struct UpsilonReport {
    double alpha_hat = 0.0;  // E[N]/n at the largest n
    double alpha_se = 0.0;
    std::vector<double> q_upsilon;  // per n: E[Upsilon]/n - alpha_hat ln(n)/mu
    std::vector<double> q_se;
    double cauchy_gap = 0.0;
    double cauchy_threshold = 0.0;
    bool cauchy_ok = false;
};
UpsilonReport upsilon_corollary_check(const ModelSpec& model,
                                      const std::vector<std::int64_t>& n_values,
                                      std::int64_t replicas, std::uint64_t master_seed);

struct ConcentrationRow {
    double x = 0.0;
    std::int64_t eligible = 0;   // depth-`depth` nodes with nL_v > x
    std::int64_t violations = 0; // |n_v - nL_v| > (nL_v)^{2/3}
    double frequency = 0.0;
    double se = 0.0;
    double bound = 0.0;  // x^{-1/4}
};
// Empirical check of the cardinality concentration bound at a fixed depth.
std::vector<ConcentrationRow> concentration_check(const ModelSpec& model, std::int64_t n,
                                                  int depth,
                                                  const std::vector<double>& x_values,
                                                  std::int64_t replicas,
                                                  std::uint64_t master_seed);

}  // namespace splitree
