#include "splitree/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace splitree {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

void check_probability_vector(const std::vector<double>& p) {
    require(p.size() >= 2, "probability vector needs at least 2 components");
    double sum = 0.0;
    for (double x : p) {
        require(x >= 0.0 && x <= 1.0, "probability vector component outside [0,1]");
        sum += x;
    }
    require(std::fabs(sum - 1.0) <= 1e-9, "probability vector does not sum to 1");
}

double beta_pdf(double v, double a, double b) {
    if (v <= 0.0 || v >= 1.0) return 0.0;
    const double lnb = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return std::exp((a - 1.0) * std::log(v) + (b - 1.0) * std::log1p(-v) - lnb);
}

// P(-ln V <= x) from an explicit finite support (V = uniformly random component).
std::function<double(double)> support_neg_log_cdf(const std::vector<DiscreteAtom>& atoms, int b) {
    std::vector<std::pair<double, double>> mass;  // (-ln v, weight)
    for (const auto& a : atoms) {
        for (double v : a.components) {
            if (v > 0.0) mass.emplace_back(-std::log(v), a.prob / b);
        }
    }
    std::sort(mass.begin(), mass.end());
    return [mass](double x) {
        double c = 0.0;
        for (const auto& [t, w] : mass) {
            if (t <= x + 1e-15) c += w;
            else break;
        }
        return c;
    };
}

ModelSpec make_bst() {
    ModelSpec m;
    m.name = "bst";
    m.params = {2, 1, 0, 1};
    m.sampler = [](RngStream& rng, std::vector<double>& out) {
        const double u = rng.u01();
        out.assign({u, 1.0 - u});
    };
    m.lattice_span = 0.0;
    m.known.mu = 0.5;
    m.known.sigma2 = 0.25;
    m.known.zeta = 7.0 - 2.0 * kPi * kPi / 3.0;
    m.known.contraction = 2.0 / 3.0;
    m.moments.kind = MomentScheme::Kind::quad1d;
    m.moments.map1 = [](double u, std::vector<double>& out) { out.assign({u, 1.0 - u}); };
    m.moments.dens1 = [](double) { return 1.0; };
    // V ~ U(0,1): P(-ln V <= x) = 1 - e^{-x}
    m.neg_log_component_cdf = [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); };
    return m;
}

ModelSpec make_trie(const std::vector<double>& p) {
    check_probability_vector(p);
    ModelSpec m;
    std::ostringstream nm;
    nm << "trie(";
    for (std::size_t i = 0; i < p.size(); ++i) nm << (i ? "," : "") << p[i];
    nm << ")";
    m.name = nm.str();
    m.params = {static_cast<int>(p.size()), 0, 0, 1};
    m.sampler = [p](RngStream&, std::vector<double>& out) { out = p; };
    m.support = {{p, 1.0}};
    std::vector<double> logs;
    for (double x : p)
        if (x > 0.0) logs.push_back(-std::log(x));
    m.lattice_span = lattice_span_of(logs);
    m.moments.kind = MomentScheme::Kind::enumeration;
    m.neg_log_component_cdf = support_neg_log_cdf(m.support, m.params.b);
    return m;
}

ModelSpec make_lattice_example() {
    // b=5, split vector a random permutation of (1/2,1/8,1/8,1/8,1/8) or
    // (1/2,1/4,1/4,0,0), each with probability 1/2. Parameters s=19, s0=0,
    // s1=4 satisfy b*s1 = s+1-s0 and give the mean oscillation a usable
    // amplitude (see experiments::lattice_oscillation).
    ModelSpec m;
    m.name = "lattice_example";
    m.params = {5, 0, 4, 19};
    static const std::vector<double> A = {0.5, 0.125, 0.125, 0.125, 0.125};
    static const std::vector<double> B = {0.5, 0.25, 0.25, 0.0, 0.0};
    m.sampler = [](RngStream& rng, std::vector<double>& out) {
        out = (rng.u01() < 0.5) ? A : B;
        // Fisher-Yates, fixed consumption of b-1 uniforms
        for (std::size_t i = out.size() - 1; i > 0; --i) {
            const auto j = rng.uniform_index(i + 1);
            std::swap(out[i], out[j]);
        }
    };
    // full support: 5 distinct arrangements of A, 30 of B
    for (int pos = 0; pos < 5; ++pos) {
        std::vector<double> v(5, 0.125);
        v[pos] = 0.5;
        m.support.push_back({v, 0.5 / 5.0});
    }
    {
        std::vector<double> base = B;
        std::sort(base.begin(), base.end());
        std::vector<std::vector<double>> perms;
        do {
            perms.push_back(base);
        } while (std::next_permutation(base.begin(), base.end()));
        for (auto& v : perms) m.support.push_back({v, 0.5 / static_cast<double>(perms.size())});
    }
    std::vector<double> logs;
    for (const auto& atom : m.support)
        for (double x : atom.components)
            if (x > 0.0) logs.push_back(-std::log(x));
    m.lattice_span = lattice_span_of(logs);  // = ln 2
    m.moments.kind = MomentScheme::Kind::enumeration;
    m.neg_log_component_cdf = support_neg_log_cdf(m.support, m.params.b);
    return m;
}

ModelSpec make_mary(int order) {
    require(order >= 2, "mary: m must be >= 2");
    ModelSpec m;
    m.name = "mary(" + std::to_string(order) + ")";
    m.params = {order, order - 1, 0, order - 1};
    m.sampler = [order](RngStream& rng, std::vector<double>& out) {
        std::vector<double> cuts(order - 1);
        for (auto& c : cuts) c = rng.u01();
        std::sort(cuts.begin(), cuts.end());
        out.resize(order);
        double prev = 0.0;
        for (int i = 0; i + 1 < order; ++i) {
            out[i] = cuts[i] - prev;
            prev = cuts[i];
        }
        out[order - 1] = 1.0 - prev;
    };
    if (order == 2) {
        m.moments.kind = MomentScheme::Kind::quad1d;
        m.moments.map1 = [](double u, std::vector<double>& out) { out.assign({u, 1.0 - u}); };
        m.moments.dens1 = [](double) { return 1.0; };
    } else if (order == 3) {
        // (V1,V2) uniform on the simplex with density 2
        m.moments.kind = MomentScheme::Kind::quad2d_simplex;
        m.moments.map2 = [](double x, double y, std::vector<double>& out) {
            out.assign({x, y, 1.0 - x - y});
        };
        m.moments.dens2 = [](double, double) { return 2.0; };
    }
    return m;
}

ModelSpec make_median_of(int k) {
    require(k >= 1, "median_of: k must be >= 1");
    ModelSpec m;
    m.name = "median_of(" + std::to_string(k) + ")";
    m.params = {2, 1, 0, 1};  // as bst, with V the median of 2k+1 uniforms
    const int draws = 2 * k + 1;
    m.sampler = [draws, k](RngStream& rng, std::vector<double>& out) {
        std::vector<double> u(draws);
        for (auto& x : u) x = rng.u01();
        std::nth_element(u.begin(), u.begin() + k, u.end());
        out.assign({u[k], 1.0 - u[k]});
    };
    m.moments.kind = MomentScheme::Kind::quad1d;
    m.moments.map1 = [](double v, std::vector<double>& out) { out.assign({v, 1.0 - v}); };
    m.moments.dens1 = [k](double v) { return beta_pdf(v, k + 1.0, k + 1.0); };
    return m;
}

ModelSpec make_quadtree(int dim) {
    require(dim >= 1 && dim <= 16, "quadtree: dim must be in [1,16]");
    ModelSpec m;
    m.name = "quadtree(" + std::to_string(dim) + ")";
    const int b = 1 << dim;
    m.params = {b, 1, 0, 1};
    m.sampler = [dim, b](RngStream& rng, std::vector<double>& out) {
        double u[16];
        for (int a = 0; a < dim; ++a) u[a] = rng.u01();
        out.resize(b);
        for (int c = 0; c < b; ++c) {
            double prod = 1.0;
            for (int a = 0; a < dim; ++a) prod *= (c >> a & 1) ? 1.0 - u[a] : u[a];
            out[c] = prod;
        }
    };
    if (dim == 1) {
        m.moments.kind = MomentScheme::Kind::quad1d;
        m.moments.map1 = [](double u, std::vector<double>& out) { out.assign({u, 1.0 - u}); };
        m.moments.dens1 = [](double) { return 1.0; };
    } else if (dim == 2) {
        m.moments.kind = MomentScheme::Kind::quad2d_square;
        m.moments.map2 = [](double x, double y, std::vector<double>& out) {
            out.assign({x * y, x * (1.0 - y), (1.0 - x) * y, (1.0 - x) * (1.0 - y)});
        };
        m.moments.dens2 = [](double, double) { return 1.0; };
    }
    return m;
}

ModelSpec make_dirichlet(const std::vector<double>& alpha) {
    require(alpha.size() >= 2, "dirichlet: need at least 2 concentration parameters");
    for (double a : alpha) require(a > 0.0, "dirichlet: alpha must be positive");
    ModelSpec m;
    std::ostringstream nm;
    nm << "dirichlet(";
    for (std::size_t i = 0; i < alpha.size(); ++i) nm << (i ? "," : "") << alpha[i];
    nm << ")";
    m.name = nm.str();
    m.params = {static_cast<int>(alpha.size()), 1, 0, 1};
    m.sampler = [alpha](RngStream& rng, std::vector<double>& out) {
        out.resize(alpha.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            out[i] = rng.gamma(alpha[i]);
            sum += out[i];
        }
        for (auto& x : out) x /= sum;
    };
    if (alpha.size() == 2) {
        const double a0 = alpha[0], a1 = alpha[1];
        m.moments.kind = MomentScheme::Kind::quad1d;
        m.moments.map1 = [](double v, std::vector<double>& out) { out.assign({v, 1.0 - v}); };
        m.moments.dens1 = [a0, a1](double v) { return beta_pdf(v, a0, a1); };
    }
    return m;
}

}  // namespace

double lattice_span_of(const std::vector<double>& xs, double tol) {
    std::vector<double> v;
    for (double x : xs)
        if (x > tol) v.push_back(x);
    if (v.empty()) return 0.0;
    const double base = *std::min_element(v.begin(), v.end());
    // candidate spans base/m; accept the largest one dividing every value
    for (int m = 1; m <= 64; ++m) {
        const double g = base / m;
        bool ok = true;
        for (double x : v) {
            const double r = x / g;
            if (std::fabs(r - std::llround(r)) > tol * std::max(1.0, r)) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
    return 0.0;
}

std::string ModelSpec::id() const {
    std::string out;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(c);
        else if (c == ',' || c == '(' ) out.push_back('-');
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out;
}

void ModelSpec::validate() const {
    params.validate();
    if (!sampler) throw ConfigError("model '" + name + "': no sampler");
    if (discrete()) {
        double psum = 0.0;
        double degenerate = 0.0;
        for (const auto& atom : support) {
            validate_split_draw(atom.components, params.b);
            require(atom.prob >= 0.0, "model '" + name + "': negative atom probability");
            psum += atom.prob;
            if (*std::max_element(atom.components.begin(), atom.components.end()) >=
                1.0 - 1e-12)
                degenerate += atom.prob;
        }
        require(std::fabs(psum - 1.0) <= 1e-12,
                "model '" + name + "': support probabilities do not sum to 1");
        require(degenerate < 1.0 - 1e-12,
                "model '" + name + "': P(exists i: V_i = 1) = 1");
    } else {
        // statistical probe with a fixed stream
        RngStream probe(0x9e1ab0f5u);
        std::vector<double> buf;
        int degenerate = 0;
        constexpr int kProbes = 10000;
        for (int i = 0; i < kProbes; ++i) {
            draw(probe, buf);
            validate_split_draw(buf, params.b);
            if (*std::max_element(buf.begin(), buf.end()) >= 1.0 - 1e-12) ++degenerate;
        }
        require(degenerate < kProbes, "model '" + name + "': all probe draws degenerate");
    }
}

ModelSpec preset(const std::string& name, const std::vector<double>& args) {
    ModelSpec m;
    if (name == "bst") {
        require(args.empty(), "bst takes no arguments");
        m = make_bst();
    } else if (name == "trie") {
        m = make_trie(args);
    } else if (name == "lattice_example") {
        require(args.empty(), "lattice_example takes no arguments");
        m = make_lattice_example();
    } else if (name == "mary") {
        require(args.size() == 1, "mary takes one argument (m)");
        require(args[0] == std::floor(args[0]), "mary: m must be an integer");
        m = make_mary(static_cast<int>(args[0]));
    } else if (name == "median_of") {
        require(args.size() == 1, "median_of takes one argument (k)");
        require(args[0] == std::floor(args[0]), "median_of: k must be an integer");
        m = make_median_of(static_cast<int>(args[0]));
    } else if (name == "quadtree") {
        require(args.size() == 1, "quadtree takes one argument (dim)");
        require(args[0] == std::floor(args[0]), "quadtree: dim must be an integer");
        m = make_quadtree(static_cast<int>(args[0]));
    } else if (name == "dirichlet") {
        m = make_dirichlet(args);
    } else {
        throw ConfigError("unknown model preset '" + name + "'");
    }
    m.spec_text = name;
    if (!args.empty()) {
        m.spec_text += ':';
        std::ostringstream ss;
        for (std::size_t i = 0; i < args.size(); ++i) ss << (i ? "," : "") << args[i];
        m.spec_text += ss.str();
    }
    m.validate();
    return m;
}

ModelSpec parse_model(const std::string& text) {
    std::string name = text;
    std::vector<double> args;
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        name = text.substr(0, colon);
        std::stringstream ss(text.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            try {
                args.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("model argument '" + tok + "' is not a number");
            }
        }
    }
    return preset(name, args);
}

std::vector<PresetInfo> preset_catalogue() {
    return {
        {"bst", "bst", "binary search tree, V = (U, 1-U)"},
        {"trie", "trie:p1,...,pb", "digital trie, V = (p1..pb) almost surely"},
        {"lattice_example", "lattice_example",
         "b=5, random permutation of (1/2,1/8,1/8,1/8,1/8) or (1/2,1/4,1/4,0,0)"},
        {"mary", "mary:m", "m-ary search tree, V = spacings of m-1 uniforms"},
        {"median_of", "median_of:k", "binary split at the median of 2k+1 uniforms"},
        {"quadtree", "quadtree:dim", "2^dim-way product-of-uniforms split"},
        {"dirichlet", "dirichlet:a1,...,ab", "V ~ Dirichlet(a1..ab)"},
    };
}

}  // namespace splitree
