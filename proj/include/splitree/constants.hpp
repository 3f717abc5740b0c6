#pragma once

#include <functional>
#include <string>

#include "splitree/model.hpp"

namespace splitree {

enum class ConstMethod { closed_form, quadrature, exact_enumeration, monte_carlo };

std::string to_string(ConstMethod m);

struct MomentResult {
    double value = 0.0;
    double error = 0.0;  // absolute error bound (quadrature tol / 4*SE for MC)
    ConstMethod method = ConstMethod::monte_carlo;
};

struct ConstantsReport {
    double mu = 0.0;
    double sigma2 = 0.0;
    double contraction_factor = 0.0;  // b E[V^2]
    double mean_C = 0.0;
    double second_moment_C = 0.0;
    double zeta = 0.0;
    ConstMethod method = ConstMethod::monte_carlo;
    double error_bound = 0.0;
};

// E[g(V)] by the evaluation hierarchy: exact enumeration (discrete) >
// adaptive 1-d/2-d quadrature (when the preset has a parameterization) >
// Monte Carlo. The g's used here are symmetric functionals of the vector.
MomentResult vector_moment(const ModelSpec& model,
                           const std::function<double(const std::vector<double>&)>& g,
                           std::uint64_t mc_seed = 0x1234, std::int64_t mc_draws = 10000000);

std::pair<double, double> compute_mu_sigma(const ModelSpec& model);

// Toll value C(V) = 1 + (1/mu) sum V_i ln V_i with 0 ln 0 = 0.
double cost_C(const std::vector<double>& draw, double mu);

double compute_zeta(const ModelSpec& model);

ConstantsReport constants_report(const ModelSpec& model);

// Adaptive Simpson to an absolute tolerance; exposed for reuse and tests.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol);

}  // namespace splitree
