#include "splitree/constants.hpp"

#include <cmath>

namespace splitree {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double m, double b,
                   double fa, double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double quad1d_moment(const ModelSpec& model,
                     const std::function<double(const std::vector<double>&)>& g, double tol) {
    std::vector<double> buf;
    auto f = [&](double u) {
        model.moments.map1(u, buf);
        return g(buf) * model.moments.dens1(u);
    };
    return adaptive_simpson(f, 0.0, 1.0, tol);
}

double quad2d_moment(const ModelSpec& model,
                     const std::function<double(const std::vector<double>&)>& g, double tol,
                     bool simplex) {
    auto outer = [&](double x) {
        std::vector<double> buf;
        const double ymax = simplex ? 1.0 - x : 1.0;
        if (ymax <= 0.0) return 0.0;
        auto inner = [&](double y) {
            model.moments.map2(x, y, buf);
            return g(buf) * model.moments.dens2(x, y);
        };
        return adaptive_simpson(inner, 0.0, ymax, tol * 0.01);
    };
    return adaptive_simpson(outer, 0.0, 1.0, tol);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 52);
}

std::string to_string(ConstMethod m) {
    switch (m) {
        case ConstMethod::closed_form: return "closed_form";
        case ConstMethod::quadrature: return "quadrature";
        case ConstMethod::exact_enumeration: return "exact_enumeration";
        case ConstMethod::monte_carlo: return "monte_carlo";
    }
    return "?";
}

MomentResult vector_moment(const ModelSpec& model,
                           const std::function<double(const std::vector<double>&)>& g,
                           std::uint64_t mc_seed, std::int64_t mc_draws) {
    constexpr double kQuadTol = 1e-10;
    MomentResult r;
    switch (model.moments.kind) {
        case MomentScheme::Kind::enumeration: {
            double acc = 0.0;
            for (const auto& atom : model.support) acc += atom.prob * g(atom.components);
            r.value = acc;
            r.error = 1e-12;
            r.method = ConstMethod::exact_enumeration;
            return r;
        }
        case MomentScheme::Kind::quad1d:
            r.value = quad1d_moment(model, g, kQuadTol);
            r.error = kQuadTol;
            r.method = ConstMethod::quadrature;
            return r;
        case MomentScheme::Kind::quad2d_square:
        case MomentScheme::Kind::quad2d_simplex:
            r.value = quad2d_moment(model, g, kQuadTol,
                                    model.moments.kind == MomentScheme::Kind::quad2d_simplex);
            r.error = 10.0 * kQuadTol;
            r.method = ConstMethod::quadrature;
            return r;
        case MomentScheme::Kind::none:
            break;
    }
    RngStream rng(mix64(mc_seed, 0xC0457));
    std::vector<double> buf;
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < mc_draws; ++i) {
        model.draw(rng, buf);
        const double x = g(buf);
        sum += x;
        sumsq += x * x;
    }
    const double n = static_cast<double>(mc_draws);
    r.value = sum / n;
    const double var = std::max(0.0, sumsq / n - r.value * r.value);
    r.error = 4.0 * std::sqrt(var / n);
    r.method = ConstMethod::monte_carlo;
    return r;
}

std::pair<double, double> compute_mu_sigma(const ModelSpec& model) {
    if (model.known.mu && model.known.sigma2) return {*model.known.mu, *model.known.sigma2};
    const auto m1 = vector_moment(model, [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s -= xlogx(x);
        return s;
    });
    const auto m2 = vector_moment(model, [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v)
            if (x > 0.0) s += x * std::log(x) * std::log(x);
        return s;
    });
    const double mu = m1.value;
    if (!(mu > 0.0)) throw ConfigError("model '" + model.name + "': mu <= 0");
    return {mu, m2.value - mu * mu};
}

double cost_C(const std::vector<double>& draw, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("cost_C: mu must be positive");
    double s = 0.0;
    for (double v : draw) s += xlogx(v);
    return 1.0 + s / mu;
}

double compute_zeta(const ModelSpec& model) {
    if (model.known.zeta) return *model.known.zeta;
    const auto [mu, sigma2] = compute_mu_sigma(model);
    (void)sigma2;
    const auto q = vector_moment(model, [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += xlogx(x);
        return s * s;
    });
    const auto s2 = vector_moment(model, [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    });
    const double denom = 1.0 - s2.value;
    if (denom <= 0.0)
        throw ConfigError("model '" + model.name + "': sum E[V_i^2] >= 1 (invariant failure)");
    return (q.value / (mu * mu) - 1.0) / denom;
}

ConstantsReport constants_report(const ModelSpec& model) {
    ConstantsReport rep;
    const auto sum_vlogv = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += xlogx(x);
        return s;
    };
    const auto mu_m = vector_moment(model, [&](const std::vector<double>& v) {
        return -sum_vlogv(v);
    });
    const auto m2_m = vector_moment(model, [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v)
            if (x > 0.0) s += x * std::log(x) * std::log(x);
        return s;
    });
    const auto q_m = vector_moment(model, [&](const std::vector<double>& v) {
        const double s = sum_vlogv(v);
        return s * s;
    });
    const auto s2_m = vector_moment(model, [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    });

    const bool closed = model.known.mu && model.known.sigma2 && model.known.zeta &&
                        model.known.contraction;
    rep.mu = model.known.mu.value_or(mu_m.value);
    rep.sigma2 = model.known.sigma2.value_or(m2_m.value - mu_m.value * mu_m.value);
    rep.contraction_factor = model.known.contraction.value_or(s2_m.value);
    const double denom = 1.0 - s2_m.value;
    if (denom <= 0.0)
        throw ConfigError("model '" + model.name + "': sum E[V_i^2] >= 1 (invariant failure)");
    rep.zeta = model.known.zeta.value_or((q_m.value / (mu_m.value * mu_m.value) - 1.0) / denom);
    rep.mean_C = 1.0 - mu_m.value / rep.mu;  // E[C] = 1 + E[sum V ln V]/mu
    rep.second_moment_C = q_m.value / (rep.mu * rep.mu) - 1.0 + 2.0 * rep.mean_C;
    rep.method = closed ? ConstMethod::closed_form : mu_m.method;
    rep.error_bound = std::max({mu_m.error, m2_m.error, q_m.error, s2_m.error});
    if (!(rep.mu > 0.0)) throw ConfigError("model '" + model.name + "': mu <= 0");
    return rep;
}

}  // namespace splitree
