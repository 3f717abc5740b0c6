#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splitree/empirical.hpp"
#include "splitree/model.hpp"

namespace splitree {

struct FixpointRun {
    std::string model_id;
    std::uint64_t seed = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> step_sizes;  // W2 between successive iterates
    EmpiricalDistribution final_distribution;
    double final_mean = 0.0;
    double final_variance = 0.0;
};

// One application of the smoothing operator T to an empirical law: each
// output sample is sum_k V_k x_{i_k} + C(V) with fresh coefficient draws and
// input samples resampled with replacement. Output generation parallelizes
// over indices with per-index substreams; the result is sorted and
// independent of the thread count.
EmpiricalDistribution apply_T(const EmpiricalDistribution& input, const ModelSpec& model,
                              double mu, std::size_t out_size, std::uint64_t seed);

// Contraction iteration from the point mass at 0 until the W2 step falls
// below tol (Cauchy criterion) or max_iter is reached.
FixpointRun iterate_to_fixpoint(const ModelSpec& model, std::size_t n_samples, double tol,
                                int max_iter, std::uint64_t seed);

// The bst instance is exactly the quicksort fixed-point equation.
FixpointRun quicksort_fixpoint(std::size_t n_samples, double tol, int max_iter,
                               std::uint64_t seed);

enum class PairFamily { scaled_normal, scaled_uniform, normal_vs_uniform };

struct ContractionRecord {
    double d2_in = 0.0;
    double d2_out = 0.0;
    // squared-distance ratio d2(Tphi,Tpsi)^2 / d2(phi,psi)^2; concentrates at
    // b E[V^2] (the unsquared ratio concentrates at its square root)
    double ratio_sq = 0.0;
};

struct ContractionReport {
    std::vector<ContractionRecord> records;
    int skipped_degenerate = 0;
};

// Empirical contraction certificate on mean-0 scale/shape pairs with common
// random numbers for the coefficient draws.
ContractionReport check_contraction(const ModelSpec& model, int trials,
                                    std::size_t n_samples, std::uint64_t seed,
                                    PairFamily family = PairFamily::scaled_normal);

}  // namespace splitree
