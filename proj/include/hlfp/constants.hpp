#pragma once
/// Universal constants of the invariant set and the reference functions g1, m1.
///
/// d(m1) - 1 is of order 1e-31 and L1 is of order exp(6e10), so both are kept
/// in forms that survive double precision: d_m1_minus_1 as its own field and
/// L1 through its logarithm.

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "specfun.hpp"

namespace hlfp {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UniversalConstants {
    double eta = 0;
    double delta0 = 0;
    double t0 = 0;        // root of phi in (0,1)
    double L0 = 0;
    double K = 0;         // slope of the linear branch of g1: 3 L0 / (4 eta)
    double x_star = 0;    // g1 switches branch at x_star = 2K
    double b_m1 = 0;
    double b_m1_excess = 0;  // b(m1) - sqrt(2)/2, below double resolution of b_m1 itself
    double c_m1 = 0;
    double d_m1 = 0;
    double d_m1_minus_1 = 0;
    double delta1 = 0;
    double delta_rho = 0;
    double ln_L1 = 0;
    double kappa_L1 = 0;  // 5 (t0 L1)^{-delta0}
    double int_phi = 0;   // should vanish
    double L0_error = 0;

    double g1(double x) const {
        x = std::abs(x);
        return std::min(1.0 + 0.5 * x * x, 1.0 + K * x);
    }
    /// m1 in closed form: m0 up to x_star, then a cubic-decay branch.
    double m1(double x) const {
        x = std::abs(x);
        if (x <= x_star) return m0(x);
        return m1_coef() / std::pow(1.0 + K * x, 3);
    }
    double m1_coef() const {
        const double a = 1.0 + K * x_star;
        return 2.0 / (2.0 + x_star * x_star) * a * a;
    }
    /// log of min{(1+3/delta1)(x/L1)^{-1-delta1}, 5 x^{-delta0}}.
    double log_decay_cap(double x) const {
        const double lx = std::log(x);
        const double a = std::log1p(3.0 / delta1) - (1.0 + delta1) * (lx - ln_L1);
        const double b = std::log(5.0) - delta0 * lx;
        return std::min(a, b);
    }
};

namespace constants_detail {

template <class F>
double tanh_sinh_checked(F f, double a, double b, const char* what, double scale = 1.0) {
    boost::math::quadrature::tanh_sinh<double> q;
    double err = 0, l1 = 0;
    const double v = q.integrate(f, a, b, 1e-14, &err, &l1);
    if (err > 1e-10 * std::max(scale, std::abs(v)))
        throw QuadratureError(std::string("quadrature did not converge: ") + what);
    return v;
}

inline double bisect(auto f, double lo, double hi, double tol) {
    double flo = f(lo);
    if ((flo > 0) == (f(hi) > 0)) throw std::runtime_error("bisection bracket does not change sign");
    for (int it = 0; it < 400 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace constants_detail

inline UniversalConstants compute_constants() {
    using namespace constants_detail;
    using std::numbers::pi;
    UniversalConstants k;
    k.eta = 1.0 / (std::pow(3.0, 11) * std::pow(2.0, 14) * std::sqrt(2.0));
    k.delta0 = 54.0 * k.eta / (8.0 + 27.0 * k.eta);

    k.t0 = bisect([](double t) { return phi(t); }, 0.5, 0.99, 1e-15);

    // L0 = int |phi|, split at t0 and 1; t > 2 handled through u = 1/t
    auto tail = [](double u) { return phi_inv_scaled(u); };
    const double p1 = tanh_sinh_checked([](double t) { return phi(t); }, 0.0, k.t0, "phi on [0,t0]");
    // two-argument form: xc is the signed distance to the nearer endpoint, so |1 - t| stays exact
    const double p2 = tanh_sinh_checked(
        [&](double t, double xc) { return xc > 0 ? 2.0 - t * std::log((1.0 + t) / xc) : phi(t); }, k.t0, 1.0,
        "phi on [t0,1]");
    const double p3 = tanh_sinh_checked(
        [](double t, double xc) { return xc < 0 ? 2.0 - t * std::log((1.0 + t) / -xc) : phi(t); }, 1.0, 2.0,
        "phi on [1,2]");
    const double p4 = tanh_sinh_checked(tail, 0.0, 0.5, "phi on [2,inf)");
    k.L0 = p1 - p2 - p3 - p4;
    k.int_phi = p1 + p2 + p3 + p4;
    k.L0_error = std::abs(k.L0 - 2.0 * k.t0 * F1(1.0 / k.t0));

    k.K = 3.0 * k.L0 / (4.0 * k.eta);
    k.x_star = 2.0 * k.K;

    // b, c of m1 relative to m0 (b(m0) = c(m0) = sqrt(2)/2); m1 - m0 lives on [x_star, inf)
    const double xs = k.x_star;
    // y = x_star / u maps [x_star, inf) onto (0, 1]
    const double C1 = k.m1_coef();
    auto diff_over_u2 = [&](double u) {  // (m1 - m0)(x_star / u) / u^2
        const double a = u + k.K * xs, q = 2.0 * u * u + xs * xs;
        return C1 * u / (a * a * a) - 4.0 * u * u / (q * q);
    };
    const double I0 = tanh_sinh_checked([&](double u) { return diff_over_u2(u) * xs; }, 0.0, 1.0,
                                        "int (m1-m0)", k.m1(xs) * xs);
    const double I2 = tanh_sinh_checked([&](double u) { return diff_over_u2(u) * u * u / xs; }, 0.0, 1.0,
                                        "int (m1-m0)/y^2", k.m1(xs) / xs);
    const double m0_head = tanh_sinh_checked([](double y) { return m0(y); }, 0.0, 1.0, "m0 head") +
                           tanh_sinh_checked([](double u) { return m0_inv_scaled(u); }, 1.0 / xs, 1.0,
                                             "m0 body");
    const double m1_tail = 1.0 / (k.K * (2.0 + xs * xs));
    k.b_m1 = 2.0 / pi * (m0_head + m1_tail);
    k.b_m1_excess = 2.0 / pi * I0;
    const double c_m0 = 4.0 / (3.0 * pi) *
                        (tanh_sinh_checked([](double y) { return y < 1e-4 ? 1.0 - 0.75 * y * y
                                                                           : (1.0 - m0(y)) / (y * y); },
                                           0.0, 1.0, "c(m0) head") +
                         tanh_sinh_checked([](double u) { return 1.0 - m0(1.0 / u); }, 0.0, 1.0, "c(m0) tail"));
    k.c_m1 = c_m0 - 4.0 / (3.0 * pi) * I2;
    k.d_m1_minus_1 = (2.0 / pi * I0 + 4.0 / (3.0 * pi) * I2) / (2.0 * k.c_m1);
    k.d_m1 = 1.0 + k.d_m1_minus_1;
    k.delta1 = k.d_m1_minus_1 / (4.0 * k.d_m1);
    k.delta_rho = 0.5 * k.delta1;

    // Phi(x) -> (2/pi) int (m1 - kappa)_+ once y/x underflows; solve deficit(kappa) = target
    const double target = k.b_m1 * k.d_m1_minus_1 / (1.0 + 2.0 * k.d_m1_minus_1);
    auto deficit = [&](double kap) {
        double yk, tail_int;
        if (kap >= k.m1(xs)) {
            yk = std::sqrt(2.0 / std::sqrt(kap) - 2.0);
            tail_int = tanh_sinh_checked([](double u) { return m0_inv_scaled(u); }, 1.0 / xs, 1.0 / yk,
                                         "m0 tail") +
                       m1_tail;
        } else {
            yk = (std::cbrt(C1 / kap) - 1.0) / k.K;
            const double a = 1.0 + k.K * yk;
            tail_int = C1 / (2.0 * k.K * a * a);
        }
        return 2.0 / pi * (kap * yk + tail_int);
    };
    const double lk = bisect([&](double l) { return std::log(deficit(std::exp(l))) - std::log(target); },
                             -400.0, -1e-3, 1e-13);
    k.kappa_L1 = std::exp(lk);
    k.ln_L1 = (std::log(5.0) - lk) / k.delta0 - std::log(k.t0);
    return k;
}

/// Process-wide cached constants.
inline const UniversalConstants& constants() {
    static const UniversalConstants k = compute_constants();
    return k;
}

}  // namespace hlfp
