#pragma once
/// Membership in the invariant set and the closed-form oracle battery.

#include <cmath>
#include <numbers>
#include <memory>
#include <string>
#include <vector>

#include "constants.hpp"
#include "transform.hpp"

namespace hlfp {

struct Clause {
    std::string name;
    bool pass = true;
    double margin = 0;  // signed; negative means violated
    double where = 0;   // abscissa of the worst node
};

struct MembershipReport {
    std::vector<Clause> clauses;
    bool member = true;
    const Clause* find(const std::string& n) const {
        for (const auto& c : clauses)
            if (c.name == n) return &c;
        return nullptr;
    }
};

struct MembershipTolerances {
    double value = 1e-12;   // f(0) = 1, f <= 1
    double relative = 1e-9; // lower bound m1, monotonicity (relative to f)
    double convex = 1e-9;   // second differences in s = x^2
    double deriv = 1e-12;   // f'_-(1) <= -eta; must stay well below eta ~ 2.4e-10
};

/// Evaluates every clause of the invariant set nodewise.
inline MembershipReport check_membership(const GridFunction& f, const MembershipTolerances& tol = {}) {
    const auto& K = constants();
    const Mesh& M = *f.mesh;
    const int n = f.size();
    MembershipReport rep;
    auto add = [&](Clause c) {
        rep.member = rep.member && c.pass;
        rep.clauses.push_back(std::move(c));
    };
    add({"normalization", std::abs(f.v[0] - 1.0) <= tol.value, tol.value - std::abs(f.v[0] - 1.0), 0.0});
    {
        Clause c{"upper_bound_1", true, 1e300, 0};
        for (int i = 0; i < n; ++i) {
            const double mg = 1.0 + tol.value - f.v[i];
            if (mg < c.margin) c = {c.name, mg >= 0, mg, M.x(i)};
        }
        add(c);
    }
    {
        // relative: m1 spans hundreds of decades of magnitude
        Clause c{"lower_bound_m1", true, 1e300, 0};
        for (int i = 0; i < n; ++i) {
            const double m1 = K.m1(M.x(i));
            const double mg = (f.v[i] - m1) / m1 + tol.relative;
            if (mg < c.margin) c = {c.name, mg >= 0, mg, M.x(i)};
        }
        add(c);
    }
    {
        Clause c{"monotone", true, 1e300, 0};
        for (int i = 0; i + 1 < n; ++i) {
            const double mg = f.v[i] - f.v[i + 1] + tol.relative * std::abs(f.v[i]);
            if (mg < c.margin) c = {c.name, mg >= 0, mg, M.x(i + 1)};
        }
        add(c);
    }
    {
        Clause c{"convex_in_x2", true, 1e300, 0};
        for (int i = 1; i + 1 < n; ++i) {
            const double s0 = M.x(i - 1) * M.x(i - 1), s1 = M.x(i) * M.x(i), s2 = M.x(i + 1) * M.x(i + 1);
            const double d2 = (f.v[i + 1] - f.v[i]) / (s2 - s1) - (f.v[i] - f.v[i - 1]) / (s1 - s0);
            const double ds = s2 - s0;
            const double mg = d2 + tol.convex * std::max(1.0, std::abs(f.v[i]) / ds);
            if (mg < c.margin) c = {c.name, mg >= 0, mg, M.x(i)};
        }
        add(c);
    }
    {
        const double fp = derivative_left(f, 1.0);
        const double mg = -K.eta - fp + tol.deriv;
        add({"derivative_at_1", mg >= 0, mg, 1.0});
    }
    {
        // log f <= log of min{(1+3/delta1)(x/L1)^{-1-delta1}, 5 x^{-delta0}}
        Clause c{"decay_caps", true, 1e300, 0};
        for (int i = 1; i < n; ++i) {
            if (!(f.v[i] > 0)) {
                if (f.v[i] < 0) c = {c.name, false, f.v[i], M.x(i)};
                continue;
            }
            const double mg = K.log_decay_cap(M.x(i)) - std::log(f.v[i]);
            if (mg < c.margin) c = {c.name, mg >= 0, mg, M.x(i)};
        }
        add(c);
    }
    return rep;
}

struct OracleItem {
    std::string name;
    double error = 0;
    double tolerance = 0;
    bool pass() const { return error <= tolerance; }
};

struct OracleReport {
    std::vector<OracleItem> items;
    bool all_pass() const {
        for (const auto& it : items)
            if (!it.pass()) return false;
        return true;
    }
};

/// Closed-form checks of T, b, c, Q, the Hilbert identity and the constants.
inline OracleReport run_oracles(const MeshPtr& mesh, const KernelOperator* op_in = nullptr) {
    using std::numbers::pi;
    const double r2 = std::sqrt(0.5);
    std::unique_ptr<KernelOperator> own;
    if (!op_in) own = std::make_unique<KernelOperator>(mesh);
    const KernelOperator& op = op_in ? *op_in : *own;
    OracleReport rep;
    auto f = sample(mesh, [](double x) { return m0(x); });
    f.match_tail(0.0, 4.0);
    const GridFunction T = apply_T(op, f);
    double eT = 0;
    for (int k = 0; k < 20; ++k) {
        const double x = std::pow(10.0, -3.0 + 6.0 * k / 19.0);
        eT = std::max(eT, std::abs(interpolate_poly(T, x) + r2 * x * x / (2.0 + x * x)));
    }
    rep.items.push_back({"T(m0) at 20 log-spaced points", eT, 1e-8});
    rep.items.push_back({"T(m0)(2)", std::abs(interpolate_poly(T, 2.0) + r2 * 4.0 / 6.0), 1e-8});
    rep.items.push_back({"T(m0) far field -> -b", std::abs(interpolate_poly(T, 1e6) + r2), 1e-5});
    rep.items.push_back({"b(m0)", std::abs(compute_b(f) - r2), 1e-8});
    rep.items.push_back({"c(m0)", std::abs(compute_c(f) - r2), 1e-8});
    rep.items.push_back({"d(m0)", std::abs(compute_d(f) - 1.0), 1e-8});
    rep.items.push_back({"Q(m0)", std::abs(compute_Q(f, T) - 0.125), 1e-8});
    rep.items.push_back({"Hilbert identity m0", hilbert_identity_check(f, T), 1e-8});
    const auto& K = constants();
    auto g = sample(mesh, [&](double x) { return K.m1(x); });
    g.match_tail(0.0, 3.0);
    rep.items.push_back({"Hilbert identity m1", hilbert_identity_check(op, g), 1e-8});
    double worst = 0;
    for (int i = 0; i < mesh->size(); ++i) {
        const double x = mesh->x(i), q = 2.0 + x * x;
        worst = std::max(worst, 4.0 / (q * q) - K.m1(x));
    }
    rep.items.push_back({"m1 >= 4/(2+x^2)^2", std::max(0.0, worst), 0.0});
    rep.items.push_back({"int phi = 0", std::abs(K.int_phi), 1e-8});
    rep.items.push_back({"L0 = 2 t0 F1(1/t0)", K.L0_error, 1e-10});
    double refl = 0;
    for (double t : {0.05, 0.3, 0.5, 0.77, 0.93, 0.999}) {
        refl = std::max(refl, std::abs(F1(1.0 / t) - (2.0 - F1(t))));
        refl = std::max(refl, std::abs(F1_prime(1.0 / t) - t * t * F1_prime(t)) / std::max(1.0, F1_prime(1.0 / t)));
        refl = std::max(refl, std::abs(F2_prime(1.0 / t) - std::pow(t, 4) * F2_prime(t)) / std::max(1.0, F2_prime(1.0 / t)));
    }
    rep.items.push_back({"F1, F2 reflections", refl, 1e-12});
    const double ends = std::max({std::abs(F1(0.0)), std::abs(F1(1.0) - 1.0), std::abs(F1(1e8) - 2.0),
                                  std::abs(F2(0.0)), std::abs(F2(1.0) - 5.0 / 6.0), std::abs(F2(1e8) - 4.0 / 3.0)});
    rep.items.push_back({"F1, F2 endpoint values", ends, 1e-10});
    {
        boost::math::quadrature::tanh_sinh<double> q;
        // t F1'(1/t) on (0,1): the log singularity at t = 1 is integrable
        const double v = q.integrate([](double t) { return t < 1.0 ? t * F1_prime(1.0 / t) : 0.0; }, 0.0, 1.0);
        rep.items.push_back({"int_0^1 t F1'(1/t) dt = 1/2", std::abs(v - 0.5), 1e-8});
    }
    return rep;
}

}  // namespace hlfp
