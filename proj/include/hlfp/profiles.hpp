#pragma once
/// Self-similar profiles from a fixed point: Omega = x f, V = c_l x m / 2,
/// U = (c g - c_l) x, with c_l = b + c and c_omega = (c - b)/2.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "maps.hpp"

namespace hlfp {

struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitDegenerate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProfileSet {
    GridFunction Omega, V, U;
    double c_l = 0, c_omega = 0, c_theta = 0;
    double alpha = 1, beta = 1;  // accumulated rescaling
};

/// Builds the profiles; refuses f whose residual exceeds max_residual.
inline ProfileSet recover(const GridFunction& f, const MapBundle& bd, double max_residual = 1e-8) {
    const double res = residual(f, bd.r);
    if (res > max_residual) throw NotConverged("f is not a fixed point: residual " + fmt17(res));
    const Mesh& M = *f.mesh;
    ProfileSet ps;
    ps.c_l = bd.b() + bd.c();
    ps.c_omega = 0.5 * (bd.c() - bd.b());
    ps.c_theta = ps.c_l + 2.0 * ps.c_omega;
    const int n = M.size();
    ps.Omega = GridFunction{f.mesh, std::vector<double>(n), {}, Parity::odd};
    ps.V = ps.Omega;
    ps.U = ps.Omega;
    for (int i = 0; i < n; ++i) {
        const double x = M.x(i);
        ps.Omega.v[i] = x * f.v[i];
        ps.V.v[i] = 0.5 * ps.c_l * x * bd.m.v[i];
        ps.U.v[i] = (bd.c() * bd.g.v[i] - ps.c_l) * x;
    }
    if (f.tail.active) ps.Omega.tail = {true, 0.0, f.tail.amp, f.tail.exponent - 1.0};
    if (bd.m.tail.active) ps.V.tail = {true, 0.0, 0.5 * ps.c_l * bd.m.tail.amp, bd.m.tail.exponent - 1.0};
    return ps;
}

/// (alpha Omega(beta x), alpha^2 V(beta x), alpha/beta U(beta x), alpha c_l, alpha c_omega)
/// with alpha = -1/c_omega and beta = 1/(alpha Omega'(0)), so c_omega = -1 and Omega'(0) = 1.
inline ProfileSet renormalize(const ProfileSet& ps) {
    if (ps.c_omega == 0.0) throw std::domain_error("c_omega = 0: cannot renormalize");
    const double alpha = -1.0 / ps.c_omega;
    const double slope = derivative_left(ps.Omega, 0.0);
    const double beta = 1.0 / (alpha * slope);
    ProfileSet out;
    out.alpha = ps.alpha * alpha;
    out.beta = ps.beta * beta;
    out.c_l = alpha * ps.c_l;
    out.c_omega = -1.0;
    out.c_theta = out.c_l + 2.0 * out.c_omega;
    // node x_new = x_old / beta carries the old value at x_old
    const MeshPtr mesh = ps.Omega.mesh->scaled(1.0 / beta);
    auto map = [&](const GridFunction& g, double factor) {
        GridFunction h{mesh, g.v, g.tail, g.parity};
        for (double& v : h.v) v *= factor;
        if (h.tail.active) h.tail.amp *= factor * std::pow(beta, -h.tail.exponent);
        return h;
    };
    out.Omega = map(ps.Omega, alpha);
    out.V = map(ps.V, alpha * alpha);
    out.U = map(ps.U, alpha / beta);
    return out;
}

struct SteadyResiduals {
    double omega_eq = 0;  // max (1+x)^{delta_d} |(c_l x + u) w_x - c_w w - v|
    double v_eq = 0;      // max (1+x)^{2 delta_d} |(c_l x + u) v_x - (2 c_w - u_x) v|
    double outpush_min = 0;  // min over x > 0 of c_l + u/x
    double nondeg_cl = 0;    // |c_l - 2 v'(0)/w'(0)|
    double nondeg_cw = 0;    // |c_omega - (c_l/2 + u'(0))|
    double u_slope_plus_b = 0;  // |u'(0) + b| (only meaningful before renormalization)
};

inline SteadyResiduals steady_state_residuals(const ProfileSet& ps, double delta_d, double b = 0.0) {
    SteadyResiduals s;
    const GridFunction wx = derivative(ps.Omega), vx = derivative(ps.V), ux = derivative(ps.U);
    s.outpush_min = 1e300;
    for (int i = 0; i < ps.Omega.size(); ++i) {
        const double x = ps.Omega.x(i), w = ps.Omega.v[i], v = ps.V.v[i], u = ps.U.v[i];
        const double tr = ps.c_l * x + u;
        const double e1 = tr * wx.v[i] - ps.c_omega * w - v;
        const double e2 = tr * vx.v[i] - (2.0 * ps.c_omega - ux.v[i]) * v;
        s.omega_eq = std::max(s.omega_eq, std::pow(1.0 + x, delta_d) * std::abs(e1));
        s.v_eq = std::max(s.v_eq, std::pow(1.0 + x, 2.0 * delta_d) * std::abs(e2));
        if (x > 0) s.outpush_min = std::min(s.outpush_min, ps.c_l + u / x);
    }
    const double w0 = derivative_left(ps.Omega, 0.0), v0 = derivative_left(ps.V, 0.0), u0 = derivative_left(ps.U, 0.0);
    s.nondeg_cl = std::abs(ps.c_l - 2.0 * v0 / w0);
    s.nondeg_cw = std::abs(ps.c_omega - (0.5 * ps.c_l + u0));
    s.u_slope_plus_b = std::abs(u0 + b);
    return s;
}

struct PlateauFit {
    double limit = 0;     // C in C + D x^{-q}
    double slope = 0;     // D
    double flatness = 0;  // (max - min)/|mean| of the raw plateau
    double residual = 0;  // rms relative residual of the two-term fit
    double lo = 0, hi = 0;
    int n = 0;
};

/// Fits x^{e} h(x) ~ C + D x^{-q} over mesh nodes in [lo, hi].
inline PlateauFit fit_plateau(const GridFunction& h, double e, double q, double lo, double hi) {
    PlateauFit p;
    p.lo = lo;
    p.hi = hi;
    std::vector<double> xs, ys;
    for (int i = 0; i < h.size(); ++i) {
        const double x = h.x(i);
        if (x < lo || x > hi) continue;
        xs.push_back(std::pow(x, -q));
        ys.push_back(std::pow(x, e) * h.v[i]);
    }
    p.n = static_cast<int>(xs.size());
    if (p.n < 8) throw FitDegenerate("plateau window holds fewer than 8 nodes");
    double mn = ys[0], mx = ys[0], sy = 0, sx = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < p.n; ++i) {
        mn = std::min(mn, ys[i]);
        mx = std::max(mx, ys[i]);
        sy += ys[i];
        sx += xs[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double mean = sy / p.n;
    p.flatness = (mx - mn) / std::abs(mean);
    const double den = p.n * sxx - sx * sx;
    p.slope = den != 0.0 ? (p.n * sxy - sx * sy) / den : 0.0;
    p.limit = (sy - p.slope * sx) / p.n;
    double ss = 0;
    for (int i = 0; i < p.n; ++i) {
        const double r = (ys[i] - (p.limit + p.slope * xs[i])) / p.limit;
        ss += r * r;
    }
    p.residual = std::sqrt(ss / p.n);
    return p;
}

struct AsymptoticReport {
    double delta_d = 0;
    PlateauFit r, m, psi;  // limits are C_r, C_m, C0
    double C_r() const { return r.limit; }
    double C_m() const { return m.limit; }
    double C0() const { return psi.limit; }
    double cm_consistency = 0;  // |C_m - C0^2/(2d)| / C_m
    double delta_identity = 0;  // |-c_omega/c_l - delta_d|
};

/// Plateaus of x^{1+dd} f, x^{1+2dd} m and x^{1/2+dd} psi over [X 10^-3, X 10^-1].
inline AsymptoticReport asymptotics(const GridFunction& f, const MapBundle& bd, double max_flatness = 0.01,
                                    double lo_frac = 1e-3, double hi_frac = 1e-1) {
    AsymptoticReport a;
    const double d = bd.d();
    a.delta_d = delta_of(d);
    const double X = f.mesh->x_max(), lo = X * lo_frac, hi = X * hi_frac;
    const double q = std::min(bd.Tf.tail.exponent, 2.0);  // rate at which g approaches 2d
    a.r = fit_plateau(f, 1.0 + a.delta_d, q, lo, hi);
    a.m = fit_plateau(bd.m, 1.0 + 2.0 * a.delta_d, q, lo, hi);
    a.psi = fit_plateau(bd.psi, 0.5 + a.delta_d, q, lo, hi);
    for (const PlateauFit* p : {&a.r, &a.m, &a.psi})
        if (p->flatness > max_flatness)
            throw FitDegenerate("plateau drifts by " + fmt17(p->flatness) + " across the fit window");
    a.cm_consistency = std::abs(a.C_m() - a.C0() * a.C0() / (2.0 * d)) / a.C_m();
    const double c_l = bd.b() + bd.c(), c_w = 0.5 * (bd.c() - bd.b());
    a.delta_identity = std::abs(-c_w / c_l - a.delta_d);
    return a;
}

struct BcIdentity {
    double residual = 0;     // |(b - c) b - (b + c) b(m) - 2Q|
    double b_m = 0;
    double k = 0;            // b/c
    double k_lhs = 0;        // (k-1)k - (k+1) b(m)/c, equal to 2Q/c^2 at a fixed point
    double k_rhs = 0;        // 2Q/c^2
    double k_bound_lhs = 0;  // (k-1)k - (k+1), at least 1/2 for a fixed point in the set
};

inline BcIdentity identity_check_bc(const MapBundle& bd) {
    BcIdentity r;
    const double b = bd.b(), c = bd.c(), Q = bd.fx.Q;
    r.b_m = compute_b(bd.m);
    r.residual = std::abs((b - c) * b - (b + c) * r.b_m - 2.0 * Q);
    r.k = b / c;
    r.k_lhs = (r.k - 1.0) * r.k - (r.k + 1.0) * r.b_m / c;
    r.k_rhs = 2.0 * Q / (c * c);
    r.k_bound_lhs = (r.k - 1.0) * r.k - (r.k + 1.0);
    return r;
}

}  // namespace hlfp
