#pragma once
/// The maps f -> g = G(f), psi, m = M(f), r = R(f) and the fixed-point residual.
///
/// r solves x g r' = d m - (d + g - 1) r with r(0) = 1.  In s = ln x this is
/// linear, r_s = beta - a r with a = (d + g - 1)/g, beta = d m / g.  On each
/// log panel a and beta are the panel polynomials; int a is integrated exactly
/// and the variation-of-constants integral is taken node to node with Gauss
/// rules fine enough to resolve e^{int a} (stiff when d is large, as in the
/// first iterates from m0).  The quotient A/B of the two integrals is never
/// formed.  Below x_min the two-term series of r is used.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "transform.hpp"

namespace hlfp {

struct PositivityError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DegenerateExponent : std::domain_error {
    using std::domain_error::domain_error;
};

struct MapBundle {
    GridFunction f, Tf, g, psi, m, r;
    GridFunction A, B;  // r = A / B, B = x^d psi^{d-1}
    Functionals fx;
    double b() const { return fx.b; }
    double c() const { return fx.c; }
    double d() const { return fx.d; }
    /// delta_d = (d - 1)/(2d): psi ~ x^{-1/2-delta_d}, r ~ x^{-1-delta_d}.
    double delta_d() const { return (fx.d - 1.0) / (2.0 * fx.d); }
};

inline double delta_of(double d) { return (d - 1.0) / (2.0 * d); }

/// g = 1 - T(f)/c, tending to 2d like -(D/c) x^{-delta'}.
inline GridFunction compute_G(const GridFunction& f, const Functionals& fx, const GridFunction& Tf) {
    (void)f;
    if (!(fx.c > 0)) throw std::domain_error("c(f) must be positive");
    GridFunction g{Tf.mesh, std::vector<double>(Tf.size()), {}, Parity::even};
    for (int i = 0; i < Tf.size(); ++i) g.v[i] = 1.0 - Tf.v[i] / fx.c;
    g.v[0] = 1.0;
    g.tail = {true, 1.0 + fx.b / fx.c, -Tf.tail.amp / fx.c, Tf.tail.exponent};
    return g;
}

/// psi = exp int_0^x (1 - g)/(y g) dy; tail C x^{-(1/2 + delta_d)}.
inline GridFunction compute_psi(const GridFunction& g, double tol = 1e-10) {
    const Mesh& M = *g.mesh;
    std::vector<double> h(M.size(), 0.0);
    for (int i = 1; i < M.size(); ++i) {
        if (g.v[i] < 1.0 - tol) throw PositivityError("g < 1 at x = " + fmt17(M.x(i)));
        h[i] = (1.0 - g.v[i]) / (M.x(i) * g.v[i]);
    }
    // near 0 the integrand is (1 - g)/(y g) ~ -y/2, zero at the origin
    const std::vector<double> L = M.cumulative(h);
    GridFunction psi{g.mesh, std::vector<double>(M.size()), {}, Parity::even};
    for (int i = 0; i < M.size(); ++i) psi.v[i] = std::exp(L[i]);
    psi.v[0] = 1.0;
    if (g.tail.active) {
        const double lim = g.tail.limit;  // 2d
        psi.match_tail(0.0, (lim - 1.0) / lim);
    }
    return psi;
}

/// m = psi^2 / g; tail exponent 1 + 2 delta_d.
inline GridFunction compute_M(const GridFunction& g, const GridFunction& psi) {
    GridFunction m{g.mesh, std::vector<double>(g.size()), {}, Parity::even};
    for (int i = 0; i < g.size(); ++i) m.v[i] = psi.v[i] * psi.v[i] / g.v[i];
    m.v[0] = 1.0;
    if (psi.tail.active) m.match_tail(0.0, 2.0 * psi.tail.exponent);
    return m;
}

/// r = R(f) from g, m, psi and d; fills b.A and b.B.
inline GridFunction compute_R(MapBundle& bd) {
    const double d = bd.d();
    // d = 1 (e.g. f = m0) is still well posed; only d < 1 breaks the construction
    if (!(d > 1.0 - 1e-9)) throw DegenerateExponent("R needs d >= 1, got d = " + fmt17(d));
    const Mesh& M = *bd.g.mesh;
    const auto& Bs = M.basis();
    const int m = Bs.size();
    GridFunction r{bd.g.mesh, std::vector<double>(M.size(), 0.0), {}, Parity::even};
    // series r = 1 + r2 x^2 on the linear panel: g ~ 1 + x^2/2, m ~ 1 - x^2
    const double r2 = -(2.0 * d + 1.0) / (2.0 * (d + 2.0));
    std::vector<double> a(m), beta(m), alpha(m), l(m);
    const auto& gx = boost::math::quadrature::gauss<double, 16>::abscissa();
    const auto& gw = boost::math::quadrature::gauss<double, 16>::weights();
    for (const Panel& P : M.panels()) {
        if (!P.log) {
            for (int j = 0; j < m; ++j) {
                const double x = M.x(P.first + j);
                r.v[P.first + j] = 1.0 + r2 * x * x;
            }
            continue;
        }
        const double h = P.half();
        double amax = 0;
        for (int j = 0; j < m; ++j) {
            const int i = P.first + j;
            const double g = bd.g.v[i];
            a[j] = (d + g - 1.0) / g;
            beta[j] = d * bd.m.v[i] / g;
            amax = std::max(amax, a[j]);
        }
        for (int k = 0; k < m; ++k) {
            double s = 0;
            for (int j = 0; j < m; ++j) s += Bs.to_leg[k * m + j] * a[j];
            alpha[k] = s;
        }
        auto E = [&](double t) { return h * Bs.integral_from_left(alpha, t); };
        // step node to node: r(t1) = r(t0) e^{E(t0)-E(t1)} + h int_{t0}^{t1} beta e^{E(t)-E(t1)} dt
        for (int i = 1; i < m; ++i) {
            const double t0 = Bs.xi[i - 1], t1 = Bs.xi[i];
            const double E1 = E(t1);
            // pieces short enough that the exponential varies by at most e on each
            const int nsub = std::max(1, static_cast<int>(std::ceil(h * amax * (t1 - t0))));
            const double len = (t1 - t0) / nsub;
            double acc = 0;
            for (int p = 0; p < nsub; ++p) {
                const double lo = t0 + p * len, mid = lo + 0.5 * len, hw = 0.5 * len;
                for (std::size_t q = 0; q < gx.size(); ++q) {
                    for (int sgn : {1, -1}) {
                        if (sgn < 0 && gx[q] == 0.0) continue;
                        const double t = mid + sgn * hw * gx[q];
                        Bs.basis(t, l);
                        double bt = 0;
                        for (int j = 0; j < m; ++j) bt += l[j] * beta[j];
                        acc += gw[q] * hw * bt * std::exp(E(t) - E1);
                    }
                }
            }
            r.v[P.first + i] = r.v[P.first + i - 1] * std::exp(E(t0) - E1) + h * acc;
        }
    }
    r.v[0] = 1.0;
    r.match_tail(0.0, 1.0 + delta_of(d));
    // B = x^d psi^{d-1}, A = r B
    bd.B = GridFunction{bd.g.mesh, std::vector<double>(M.size(), 0.0), {}, Parity::even};
    bd.A = bd.B;
    for (int i = 1; i < M.size(); ++i) {
        const double lB = d * std::log(M.x(i)) + (d - 1.0) * std::log(bd.psi.v[i]);
        bd.B.v[i] = std::exp(lB);
        bd.A.v[i] = r.v[i] * bd.B.v[i];
    }
    return r;
}

/// Full pipeline f -> (T f, b, c, d, Q, g, psi, m, r).
inline MapBundle apply_maps(const KernelOperator& op, const GridFunction& f) {
    MapBundle bd;
    bd.f = f;
    bd.Tf = apply_T(op, f);
    bd.fx = compute_functionals(op, f, &bd.Tf);
    bd.g = compute_G(f, bd.fx, bd.Tf);
    bd.psi = compute_psi(bd.g);
    bd.m = compute_M(bd.g, bd.psi);
    bd.r = compute_R(bd);
    return bd;
}

/// max_i |f_i - r_i|.
inline double residual(const GridFunction& f, const GridFunction& r) {
    transform_detail::require_same_mesh(f.mesh, r.mesh);
    double e = 0;
    for (int i = 0; i < f.size(); ++i) e = std::max(e, std::abs(f.v[i] - r.v[i]));
    return e;
}

/// max_i (1 + x_i)^{1 + delta_rho} |f_i - r_i|.
inline double weighted_residual(const GridFunction& f, const GridFunction& r, double delta_rho) {
    transform_detail::require_same_mesh(f.mesh, r.mesh);
    double e = 0;
    for (int i = 0; i < f.size(); ++i)
        e = std::max(e, std::pow(1.0 + f.x(i), 1.0 + delta_rho) * std::abs(f.v[i] - r.v[i]));
    return e;
}

/// max_i |x g r' - (d m - (d + g - 1) r)| / (1 + x).
inline double ode_residual(const MapBundle& bd) {
    const GridFunction dr = derivative(bd.r);
    const double d = bd.d();
    double e = 0;
    for (int i = 0; i < dr.size(); ++i) {
        const double x = dr.x(i), g = bd.g.v[i];
        const double res = x * g * dr.v[i] - (d * bd.m.v[i] - (d + g - 1.0) * bd.r.v[i]);
        e = std::max(e, std::abs(res) / (1.0 + x));
    }
    return e;
}

}  // namespace hlfp
