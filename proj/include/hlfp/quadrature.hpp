#pragma once
/// Reference-interval polynomial machinery on Gauss-Lobatto nodes, plus a
/// graded Gauss-Legendre rule for integrands with a log singularity.

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hlfp {

namespace quad_detail {

// P_n(x) and P_n'(x)
inline void legendre(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace quad_detail

/// Lagrange basis on the n+1 Gauss-Lobatto points of [-1, 1].
struct LobattoBasis {
    int n = 0;
    std::vector<double> xi, w, lambda;  // nodes, quadrature weights, barycentric weights
    std::vector<double> D;              // differentiation, row-major (n+1)^2
    std::vector<double> C;              // C[i][j] = int_{-1}^{xi_i} l_j
    std::vector<double> to_leg;         // nodal values -> Legendre coefficients, row-major

    explicit LobattoBasis(int order = 8) : n(order) {
        if (n < 2) throw std::invalid_argument("Lobatto order must be >= 2");
        const int m = n + 1;
        xi.assign(m, 0.0);
        w.assign(m, 0.0);
        xi[0] = -1.0;
        xi[n] = 1.0;
        for (int k = 1; k < n; ++k) {
            double x = -std::cos(std::numbers::pi * k / n);
            // roots of P_n' via Newton on (1-x^2) P_n'(x) = n (P_{n-1} - x P_n)
            for (int it = 0; it < 100; ++it) {
                double p, dp;
                quad_detail::legendre(n, x, p, dp);
                // d/dx P_n' = (2x P_n' - n(n+1) P_n) / (1 - x^2)
                const double ddp = (2.0 * x * dp - n * (n + 1.0) * p) / (1.0 - x * x);
                const double dx = dp / ddp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            xi[k] = x;
        }
        for (int k = 0; k < m; ++k) {
            double p, dp;
            quad_detail::legendre(n, xi[k], p, dp);
            if (k == 0 || k == n) p = 1.0;
            w[k] = 2.0 / (n * (n + 1.0) * p * p);
        }
        lambda.assign(m, 1.0);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                if (k != j) lambda[j] /= (xi[j] - xi[k]);
        D.assign(m * m, 0.0);
        for (int i = 0; i < m; ++i) {
            double s = 0;
            for (int j = 0; j < m; ++j) {
                if (i == j) continue;
                D[i * m + j] = lambda[j] / lambda[i] / (xi[i] - xi[j]);
                s += D[i * m + j];
            }
            D[i * m + i] = -s;
        }
        // Legendre-Vandermonde inverse by Gauss-Jordan
        {
            std::vector<double> V(m * m), I(m * m, 0.0);
            for (int j = 0; j < m; ++j) {
                double pm1 = 1.0, p0 = xi[j];
                V[j * m + 0] = 1.0;
                if (m > 1) V[j * m + 1] = xi[j];
                for (int k = 1; k + 1 < m; ++k) {
                    const double p1 = ((2.0 * k + 1.0) * xi[j] * p0 - k * pm1) / (k + 1.0);
                    V[j * m + k + 1] = p1;
                    pm1 = p0;
                    p0 = p1;
                }
                I[j * m + j] = 1.0;
            }
            for (int c = 0; c < m; ++c) {
                int piv = c;
                for (int r = c + 1; r < m; ++r)
                    if (std::abs(V[r * m + c]) > std::abs(V[piv * m + c])) piv = r;
                for (int k = 0; k < m; ++k) {
                    std::swap(V[c * m + k], V[piv * m + k]);
                    std::swap(I[c * m + k], I[piv * m + k]);
                }
                const double d = V[c * m + c];
                for (int k = 0; k < m; ++k) {
                    V[c * m + k] /= d;
                    I[c * m + k] /= d;
                }
                for (int r = 0; r < m; ++r) {
                    if (r == c) continue;
                    const double q = V[r * m + c];
                    for (int k = 0; k < m; ++k) {
                        V[r * m + k] -= q * V[c * m + k];
                        I[r * m + k] -= q * I[c * m + k];
                    }
                }
            }
            // V is the map coefficients -> values, so I is values -> coefficients
            to_leg = I;
        }
        C.assign(m * m, 0.0);
        const auto& gx = boost::math::quadrature::gauss<double, 20>::abscissa();
        const auto& gw = boost::math::quadrature::gauss<double, 20>::weights();
        std::vector<double> l(m);
        for (int i = 1; i < m; ++i) {
            const double h = 0.5 * (xi[i] + 1.0);
            auto acc = [&](double t, double wt) {
                basis(-1.0 + h * (t + 1.0), l);
                for (int j = 0; j < m; ++j) C[i * m + j] += wt * h * l[j];
            };
            for (std::size_t q = 0; q < gx.size(); ++q) {
                acc(gx[q], gw[q]);
                if (gx[q] != 0.0) acc(-gx[q], gw[q]);
            }
        }
    }

    int size() const { return n + 1; }

    /// int_{-1}^t of the polynomial with Legendre coefficients c.
    double integral_from_left(const std::vector<double>& c, double t) const {
        // int_{-1}^t P_k = (P_{k+1} - P_{k-1})/(2k+1) for k >= 1, t + 1 for k = 0
        double pm1 = 1.0, p0 = t;  // P_0, P_1
        double s = c[0] * (t + 1.0);
        for (int k = 1; k < static_cast<int>(c.size()); ++k) {
            const double p1 = ((2.0 * k + 1.0) * t * p0 - k * pm1) / (k + 1.0);  // P_{k+1}
            s += c[k] * (p1 - pm1) / (2.0 * k + 1.0);
            pm1 = p0;
            p0 = p1;
        }
        return s;
    }

    /// All Lagrange basis values at xi_ref in [-1, 1].
    void basis(double t, std::vector<double>& out) const {
        const int m = n + 1;
        out.assign(m, 0.0);
        double den = 0;
        for (int j = 0; j < m; ++j) {
            const double d = t - xi[j];
            if (d == 0.0) {
                out.assign(m, 0.0);
                out[j] = 1.0;
                return;
            }
            out[j] = lambda[j] / d;
            den += out[j];
        }
        for (double& v : out) v /= den;
    }
};

/// Quadrature nodes on [a, b] for integrands with an integrable log
/// singularity at (or just outside) c.  The interval is split at c and each
/// side is graded geometrically towards c; every piece uses a 16-point Gauss
/// rule.  sink(u, u - c, weight) receives every node; the offset is formed
/// without cancellation.
inline void graded_nodes(double a, double b, double c, double ratio, int levels, auto&& sink) {
    const auto& gx = boost::math::quadrature::gauss<double, 16>::abscissa();
    const auto& gw = boost::math::quadrature::gauss<double, 16>::weights();
    // piece in offset space relative to c: [o_lo, o_hi]
    auto piece = [&](double o_lo, double o_hi) {
        const double h = 0.5 * (o_hi - o_lo), mid = 0.5 * (o_hi + o_lo);
        if (!(h > 0)) return;
        for (std::size_t q = 0; q < gx.size(); ++q) {
            const double o1 = mid + h * gx[q], o2 = mid - h * gx[q];
            sink(c + o1, o1, gw[q] * h);
            if (gx[q] != 0.0) sink(c + o2, o2, gw[q] * h);
        }
    };
    // grade from offset o_near towards o_far (same sign)
    auto side = [&](double o_near, double o_far) {
        const double len = o_far - o_near;
        double outer = o_far;
        for (int k = 0; k < levels; ++k) {
            const double inner = o_near + len * std::pow(ratio, k + 1);
            piece(std::min(inner, outer), std::max(inner, outer));
            outer = inner;
        }
        piece(std::min(o_near, outer), std::max(o_near, outer));
    };
    if (c <= a) {
        side(a - c, b - c);
    } else if (c >= b) {
        side(b - c, a - c);
    } else {
        side(0.0, a - c);
        side(0.0, b - c);
    }
}

}  // namespace hlfp
