#pragma once
/// Kernel special functions F1, F2, phi and their derivatives.
///
/// Series are used away from t = 1 (t < 1/2 directly, t > 2 through the
/// reflection identities); the closed forms cover [1/2, 2].

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hlfp {

struct PoleError : std::domain_error {
    using std::domain_error::domain_error;
};

namespace specfun_detail {

inline constexpr int n_taylor = 64;
inline constexpr double t_lo = 0.5;
inline constexpr double t_hi = 2.0;

// ln|(t+1)/(t-1)| = 2 atanh(min(t,1/t))
template <class Real>
Real log_ratio(Real t) {
    return t < Real(1) ? Real(2) * std::atanh(t) : Real(2) * std::atanh(Real(1) / t);
}

// sum_{n>=1} a_n u^n with u = t^2, a_n = 2/(4n^2-1)
template <class Real>
Real f1_series(Real t) {
    const Real u = t * t;
    Real p = u, s = 0;
    for (int n = 1; n <= n_taylor; ++n) {
        s += Real(2) * p / Real(4 * n * n - 1);
        p *= u;
    }
    return s;
}

template <class Real>
Real f1p_series(Real t) {
    const Real u = t * t;
    Real p = t, s = 0;
    for (int n = 1; n <= n_taylor; ++n) {
        s += Real(4 * n) * p / Real(4 * n * n - 1);
        p *= u;
    }
    return s;
}

template <class Real>
Real f2_series(Real t) {
    const Real u = t * t;
    Real p = u, s = 0;
    for (int n = 1; n <= n_taylor; ++n) {
        s += Real(4 * (n + 1)) * p / Real((2 * n - 1) * (2 * n + 1) * (2 * n + 3));
        p *= u;
    }
    return s;
}

// 4/3 - F2(1/t) for small t
template <class Real>
Real f2_inv_series(Real t) {
    const Real u = t * t;
    Real p = u * u, s = 0;
    for (int n = 1; n <= n_taylor; ++n) {
        s += Real(4 * n) * p / Real((2 * n - 1) * (2 * n + 1) * (2 * n + 3));
        p *= u;
    }
    return s;
}

template <class Real>
Real f2p_series(Real t) {
    const Real u = t * t;
    Real p = t, s = 0;
    for (int n = 1; n <= n_taylor; ++n) {
        s += Real(8 * n * (n + 1)) * p / Real((2 * n - 1) * (2 * n + 1) * (2 * n + 3));
        p *= u;
    }
    return s;
}

/// Geometric-tail bound on the truncated remainder of the F1' series at t.
inline double series_remainder_bound(double t) {
    const double u = t * t;
    const double last = std::pow(u, n_taylor) * t * 4.0 * (n_taylor + 1) /
                        (4.0 * (n_taylor + 1) * (n_taylor + 1) - 1.0);
    return last / (1.0 - u);
}

}  // namespace specfun_detail

template <class Real = double>
Real F1(Real t) {
    using namespace specfun_detail;
    if (t < Real(t_lo)) return f1_series(t);
    if (t > Real(t_hi)) return Real(2) - f1_series(Real(1) / t);
    if (t == Real(1)) return Real(1);
    return (t * t - Real(1)) / (Real(2) * t) * log_ratio(t) + Real(1);
}

template <class Real = double>
Real F1_prime(Real t) {
    using namespace specfun_detail;
    if (t == Real(1)) throw PoleError("F1' has a logarithmic pole at t = 1");
    if (t < Real(t_lo)) return f1p_series(t);
    if (t > Real(t_hi)) return f1p_series(Real(1) / t) / (t * t);
    return (t * t + Real(1)) / (Real(2) * t * t) * log_ratio(t) - Real(1) / t;
}

template <class Real = double>
Real F2(Real t) {
    using namespace specfun_detail;
    if (t < Real(t_lo)) return f2_series(t);
    if (t > Real(t_hi)) return Real(4) / Real(3) - f2_inv_series(Real(1) / t);
    if (t == Real(1)) return Real(5) / Real(6);
    const Real t2 = t * t;
    return (Real(3) * t2 * t2 - Real(2) * t2 - Real(1)) / (Real(8) * t2 * t) * log_ratio(t) +
           Real(1) / (Real(4) * t2) + Real(7) / Real(12);
}

template <class Real = double>
Real F2_prime(Real t) {
    using namespace specfun_detail;
    if (t == Real(1)) throw PoleError("F2' has a logarithmic pole at t = 1");
    if (t < Real(t_lo)) return f2p_series(t);
    if (t > Real(t_hi)) {
        const Real t2 = t * t;
        return f2p_series(Real(1) / t) / (t2 * t2);
    }
    const Real t2 = t * t;
    return (Real(3) * t2 * t2 + Real(2) * t2 + Real(3)) / (Real(8) * t2 * t2) * log_ratio(t) -
           (Real(3) * t2 + Real(3)) / (Real(4) * t2 * t);
}

/// phi(t) = 2 - t ln|(1+t)/(1-t)|.  -phi(y/x) is the kernel of T.
/// Returns -inf at t = 1.
template <class Real = double>
Real phi(Real t) {
    using namespace specfun_detail;
    if (t == Real(1)) return -std::numeric_limits<Real>::infinity();
    if (t > Real(t_hi)) {
        // -2 sum_{n>=1} t^{-2n}/(2n+1)
        const Real u = Real(1) / (t * t);
        Real p = u, s = 0;
        for (int n = 1; n <= n_taylor; ++n) {
            s += p / Real(2 * n + 1);
            p *= u;
            if (p < Real(1e-18) * s) break;
        }
        return Real(-2) * s;
    }
    return Real(2) - t * log_ratio(t);
}

/// phi(1/u)/u^2, regular at u = 0 (value -2/3).
template <class Real = double>
Real phi_inv_scaled(Real u) {
    if (u < Real(0.5)) {
        const Real w = u * u;
        Real p = 1, s = 0;
        for (int n = 1; n <= specfun_detail::n_taylor; ++n) {
            s += p / Real(2 * n + 1);
            p *= w;
            if (p < Real(1e-18) * s) break;
        }
        return Real(-2) * s;
    }
    return phi(Real(1) / u) / (u * u);
}

/// The reference profile m0(x) = (1 + x^2/2)^{-2}.
inline double m0(double x) {
    const double q = 1.0 + 0.5 * x * x;
    return 1.0 / (q * q);
}

/// m0(1/u)/u^2 = 4u^2/(1+2u^2)^2.
inline double m0_inv_scaled(double u) {
    const double q = 1.0 + 2.0 * u * u;
    return 4.0 * u * u / (q * q);
}

}  // namespace hlfp
