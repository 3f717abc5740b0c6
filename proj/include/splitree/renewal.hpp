#pragma once

#include <cstdint>
#include <vector>

#include "splitree/model.hpp"

namespace splitree {

enum class RenewalMethod { branching_enumeration, tilted_walk_mc };

struct RenewalTable {
    std::vector<double> t;      // ascending grid from 0
    std::vector<double> U;      // estimates of U(t)
    std::vector<double> Uhat;   // e^{-t} U(t)
    std::vector<double> se_Uhat;  // replica standard errors on Uhat
    RenewalMethod method = RenewalMethod::branching_enumeration;
    std::int64_t replicas = 0;
};

struct OvershootHistogram {
    std::vector<double> alpha;   // class right edges, descending from 1
    std::vector<double> mass;    // c_alpha estimates E[|R_{alpha B}|]/(n/B)
    std::vector<double> se;
    std::int64_t n = 0;
    double B = 0.0;
    double gamma = 0.0;
    double eps = 0.0;
    std::int64_t replicas = 0;
    double total_mass = 0.0;
    double se_total = 0.0;
};

// One increment of the size-biased walk: -ln V_j with j picked with
// probability V_j from a fresh split-vector draw.
double size_biased_increment(const ModelSpec& model, RngStream& rng,
                             std::vector<double>& buf);

// The exponential renewal function U(t) = sum_k b^k P(S_k <= t) on a grid.
//  - branching_enumeration expands the weighted branching walk (node budget
//    roughly e^{t_max}/mu per replica; t_max <= 16 enforced).
//  - tilted_walk_mc uses e^{-t}U(t) = int nuhat(t-u) dF(u) with F the
//    renewal function of the size-biased walk.
RenewalTable renewal_U(const ModelSpec& model, double t_max, double grid_step,
                       RenewalMethod method, std::uint64_t seed, std::int64_t replicas,
                       std::int64_t node_budget = 100000000);

// Trapezoidal evaluation of int_0^x e^{-t}(U(t) - mu^{-1} e^t) dt from a
// table covering [0, x] with step <= 0.05.
double vlem_integral(const ModelSpec& model, double x, const RenewalTable& table);

// Fringe-root overshoot classes: first nodes with nL_r < B, binned by
// nL_r/B into [alpha-gamma, alpha) over alpha in {1, 1-gamma, ..., eps^2}.
OvershootHistogram overshoot_classes(const ModelSpec& model, std::int64_t n, double B,
                                     double gamma, double eps, std::int64_t replicas,
                                     std::uint64_t seed,
                                     std::int64_t node_budget = 100000000);

// E[sum_{v != root} n_v 1{n L_v >= B}] / with standard error; simulated on
// the top of the tree only (children below the threshold are pruned).
std::pair<double, double> top_contribution(const ModelSpec& model, std::int64_t n, double B,
                                           std::int64_t replicas, std::uint64_t seed);

}  // namespace splitree
