#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitree/rng.hpp"

namespace splitree {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// almost-surely-terminating loops that hit their round cap (degenerate model)
struct NonTerminatingRedistribution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Integer model parameters (b, s0, s1, s).
struct SplitParams {
    int b = 2;   // branch factor
    int s0 = 0;  // items retained per internal node
    int s1 = 0;  // items force-placed per child on overflow
    int s = 0;   // leaf capacity

    void validate() const {
        if (b < 2) throw ConfigError("SplitParams: b must be >= 2");
        if (s < 0 || s0 < 0 || s1 < 0) throw ConfigError("SplitParams: negative parameter");
        if (static_cast<long long>(b) * s1 > s + 1 - s0)
            throw ConfigError("SplitParams: b*s1 <= s+1-s0 violated");
    }
};

// 0*ln(0) := 0 everywhere (continuity convention, needed for zero components).
inline double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

inline void validate_split_draw(const std::vector<double>& v, int b, double tol = 1e-12) {
    if (static_cast<int>(v.size()) != b) throw ConfigError("split vector: wrong length");
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("split vector: component outside [0,1]");
        sum += x;
    }
    if (std::fabs(sum - 1.0) > tol) throw ConfigError("split vector: components do not sum to 1");
}

struct KnownConstants {
    std::optional<double> mu;
    std::optional<double> sigma2;
    std::optional<double> zeta;
    std::optional<double> contraction;  // b E[V^2]
};

struct DiscreteAtom {
    std::vector<double> components;
    double prob;
};

// How vector moments E[g(V)] are evaluated analytically, when possible.
struct MomentScheme {
    enum class Kind { none, enumeration, quad1d, quad2d_square, quad2d_simplex };
    Kind kind = Kind::none;
    // quad1d: V = map1(u) with u-density dens1 on (0,1)
    std::function<void(double, std::vector<double>&)> map1;
    std::function<double(double)> dens1;
    // quad2d: V = map2(x,y) with density dens2 on the unit square / simplex x+y<=1
    std::function<void(double, double, std::vector<double>&)> map2;
    std::function<double(double, double)> dens2;
};

// A named split-tree model: parameters, split-vector sampler, metadata.
// Immutable after construction; the sampler holds no mutable state.
struct ModelSpec {
    std::string name;       // display form, e.g. "trie(0.5,0.5)"
    std::string spec_text;  // parseable form, e.g. "trie:0.5,0.5"
    SplitParams params;
    std::function<void(RngStream&, std::vector<double>&)> sampler;
    double lattice_span = 0.0;  // d; 0 means nonlattice
    KnownConstants known;
    std::vector<DiscreteAtom> support;  // nonempty iff the law is discrete
    MomentScheme moments;
    // exact x -> P(-ln V <= x) when available (V a uniformly random component)
    std::function<double(double)> neg_log_component_cdf;

    bool discrete() const { return !support.empty(); }

    void draw(RngStream& rng, std::vector<double>& out) const { sampler(rng, out); }

    // sanitized identifier for file names
    std::string id() const;

    // Registration validation: SplitParams invariants, sampler output checks,
    // P(exists i: V_i = 1) < 1 (exact for discrete laws, 1e4 probe draws for
    // continuous ones), discrete probabilities summing to 1.
    void validate() const;
};

// One uniformly random component of a fresh split-vector draw.
inline double uniform_component(const ModelSpec& model, RngStream& rng,
                                std::vector<double>& buf) {
    model.draw(rng, buf);
    return buf[rng.uniform_index(buf.size())];
}

// Presets catalogue: bst, trie(p...), lattice_example, mary(m), median_of(k),
// quadtree(dim), dirichlet(alpha...).
ModelSpec preset(const std::string& name, const std::vector<double>& args = {});

// "name" or "name:0.5,0.5" forms used by the CLI and config files.
ModelSpec parse_model(const std::string& text);

// Largest a > 0 such that every value in xs is an integer multiple of a
// (within tol); 0 if none. Used for exact lattice spans of finite supports.
double lattice_span_of(const std::vector<double>& xs, double tol = 1e-9);

struct PresetInfo {
    std::string name;
    std::string signature;
    std::string summary;
};
std::vector<PresetInfo> preset_catalogue();

}  // namespace splitree
