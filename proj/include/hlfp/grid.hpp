#pragma once
/// Half-line mesh of Lobatto panels and grid functions with an algebraic tail.
///
/// Panels are uniform in s = ln x between x_min and x_max, with a finer band
/// of panels around x = 1; one linear panel covers [0, x_min].  Decade
/// boundaries are panel breakpoints, so 0, 1 and x_max are exact nodes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadrature.hpp"

namespace hlfp {

struct MeshParams {
    double x_max = 1e16;
    double x_min = 1e-8;
    int order = 8;                   // Lobatto intervals per panel
    int panels_per_decade = 4;       // outside the core band
    int core_panels_per_decade = 16; // inside [core_lo, core_hi]
    double core_lo = 1e-2;
    double core_hi = 1e3;
    int refine = 1;                  // multiplies both panel densities
    int min_points_per_decade = 32;  // checked on [1e-8, 1e8]

    bool operator==(const MeshParams&) const = default;
};

struct Panel {
    double a = 0, b = 0;
    bool log = true;  // parametrised by ln x (otherwise by x)
    int first = 0;    // global index of the node at a
    double half() const { return log ? 0.5 * std::log(b / a) : 0.5 * (b - a); }
};

class Mesh {
public:
    explicit Mesh(const MeshParams& p = {}) : p_(p), basis_(p.order) { build(); }

    const MeshParams& params() const { return p_; }
    const LobattoBasis& basis() const { return basis_; }
    const std::vector<double>& x() const { return x_; }
    double x(int i) const { return x_[i]; }
    int size() const { return static_cast<int>(x_.size()); }
    double x_max() const { return x_.back(); }
    const std::vector<Panel>& panels() const { return panels_; }
    /// int f dx over [0, x_max] is sum_j wx[j] f_j.
    const std::vector<double>& wx() const { return wx_; }
    int node_of(double x) const {
        auto it = std::lower_bound(x_.begin(), x_.end(), x);
        if (it == x_.end() || *it != x) return -1;
        return static_cast<int>(it - x_.begin());
    }
    /// Index of the panel containing x (the left one at a breakpoint).
    int panel_of(double x) const {
        if (x <= panels_.front().b) return 0;
        auto it = std::lower_bound(breaks_.begin(), breaks_.end(), x);
        int k = static_cast<int>(it - breaks_.begin()) - 1;
        return std::clamp(k, 0, static_cast<int>(panels_.size()) - 1);
    }
    /// Smallest number of nodes in any decade of [1e-8, 1e8] (clipped to the mesh).
    int min_points_per_decade() const {
        int best = 1 << 30;
        for (int e = -8; e < 8; ++e) {
            const double lo = std::pow(10.0, e), hi = std::pow(10.0, e + 1);
            if (lo < x_min_log() || hi > x_max()) continue;
            int n = 0;
            for (double v : x_) n += (v >= lo && v < hi);
            best = std::min(best, n);
        }
        return best;
    }
    /// Reference coordinate of x inside panel k.
    double to_ref(int k, double x) const {
        const Panel& P = panels_[k];
        if (P.log) return 2.0 * std::log(x / P.a) / std::log(P.b / P.a) - 1.0;
        return 2.0 * (x - P.a) / (P.b - P.a) - 1.0;
    }
    double from_ref(int k, double t) const {
        const Panel& P = panels_[k];
        if (t == -1.0) return P.a;
        if (t == 1.0) return P.b;
        if (P.log) return P.a * std::exp((t + 1.0) * P.half());
        return P.a + (t + 1.0) * P.half();
    }

    /// Cumulative integral from 0 of the integrand h (given per node, dx measure).
    std::vector<double> cumulative(const std::vector<double>& h) const {
        const int m = basis_.size();
        std::vector<double> out(x_.size(), 0.0);
        double acc = 0;
        std::vector<double> loc(m);
        for (const Panel& P : panels_) {
            const double hh = P.half();
            for (int j = 0; j < m; ++j) loc[j] = h[P.first + j] * (P.log ? x_[P.first + j] : 1.0);
            for (int i = 1; i < m; ++i) {
                double s = 0;
                for (int j = 0; j < m; ++j) s += basis_.C[i * m + j] * loc[j];
                out[P.first + i] = acc + hh * s;
            }
            acc = out[P.first + m - 1];
        }
        return out;
    }

    /// Mesh with every node multiplied by lambda (panels keep their shape).
    std::shared_ptr<const Mesh> scaled(double lambda) const {
        auto m = std::make_shared<Mesh>(*this);
        for (double& v : m->x_) v *= lambda;
        for (Panel& P : m->panels_) {
            P.a *= lambda;
            P.b *= lambda;
        }
        for (double& v : m->breaks_) v *= lambda;
        for (double& v : m->wx_) v *= lambda;
        m->scale_ *= lambda;
        return m;
    }
    double scale() const { return scale_; }

private:
    double x_min_log() const { return p_.x_min * scale_; }

    void build() {
        if (!(p_.x_min > 0 && p_.x_max > 1 && p_.x_min < 1))
            throw std::invalid_argument("mesh requires 0 < x_min < 1 < x_max");
        if (p_.refine < 1 || p_.panels_per_decade < 1 || p_.core_panels_per_decade < 1)
            throw std::invalid_argument("mesh densities must be positive");
        breaks_ = {0.0, p_.x_min};
        const double e0 = std::log10(p_.x_min), e1 = std::log10(p_.x_max);
        // decade boundaries, plus x_min / x_max themselves if they are not powers of ten
        std::vector<double> dec;
        for (double e = std::ceil(e0 - 1e-12); e <= e1 + 1e-12; e += 1.0) dec.push_back(e);
        if (dec.empty() || std::abs(dec.front() - e0) > 1e-12) dec.insert(dec.begin(), e0);
        if (std::abs(dec.back() - e1) > 1e-12) dec.push_back(e1);
        for (std::size_t k = 0; k + 1 < dec.size(); ++k) {
            const double lo = dec[k], hi = dec[k + 1];
            const double mid = std::pow(10.0, 0.5 * (lo + hi));
            const bool core = mid >= p_.core_lo && mid <= p_.core_hi;
            const int per = (core ? p_.core_panels_per_decade : p_.panels_per_decade) * p_.refine;
            const int np = std::max(1, static_cast<int>(std::ceil(per * (hi - lo) - 1e-9)));
            for (int i = 1; i <= np; ++i) {
                const double e = lo + (hi - lo) * i / np;
                breaks_.push_back(i == np && k + 2 == dec.size() ? p_.x_max : std::pow(10.0, e));
            }
        }
        const int n = p_.order;
        x_.clear();
        panels_.clear();
        x_.push_back(0.0);
        for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) {
            Panel P{breaks_[k], breaks_[k + 1], k > 0, static_cast<int>(x_.size()) - 1};
            panels_.push_back(P);
            const int kk = static_cast<int>(panels_.size()) - 1;
            for (int i = 1; i <= n; ++i) x_.push_back(from_ref(kk, basis_.xi[i]));
        }
        wx_.assign(x_.size(), 0.0);
        for (const Panel& P : panels_)
            for (int j = 0; j <= n; ++j)
                wx_[P.first + j] += basis_.w[j] * P.half() * (P.log ? x_[P.first + j] : 1.0);
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (!(x_[i] > x_[i - 1])) throw std::logic_error("mesh nodes not increasing");
    }

    MeshParams p_;
    LobattoBasis basis_;
    std::vector<double> x_, breaks_, wx_;
    std::vector<Panel> panels_;
    double scale_ = 1.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

inline MeshPtr make_mesh(const MeshParams& p = {}) { return std::make_shared<const Mesh>(p); }

/// value ~ limit + amp * x^{-exponent} beyond x_max.
struct Tail {
    bool active = false;
    double limit = 0;
    double amp = 0;
    double exponent = 0;
    double operator()(double x) const { return limit + amp * std::pow(x, -exponent); }
    bool operator==(const Tail&) const = default;
};

enum class Parity { even, odd };

struct GridFunction {
    MeshPtr mesh;
    std::vector<double> v;
    Tail tail;
    Parity parity = Parity::even;

    int size() const { return static_cast<int>(v.size()); }
    double operator[](int i) const { return v[i]; }
    double x(int i) const { return mesh->x(i); }
    double back() const { return v.back(); }
    /// Tail matched to the value at x_max with the given limit and exponent.
    void match_tail(double limit, double exponent) {
        const double X = mesh->x_max();
        tail = {true, limit, (v.back() - limit) * std::pow(X, exponent), exponent};
    }
};

template <class F>
GridFunction sample(const MeshPtr& mesh, F&& fn, Tail tail = {}, Parity parity = Parity::even) {
    GridFunction g{mesh, std::vector<double>(mesh->size()), tail, parity};
    for (int i = 0; i < mesh->size(); ++i) g.v[i] = fn(mesh->x(i));
    return g;
}

/// Per-panel derivative in the panel variable, at the panel's own nodes.
inline void panel_derivative(const GridFunction& gf, int k, std::vector<double>& out) {
    const Mesh& M = *gf.mesh;
    const auto& B = M.basis();
    const int m = B.size();
    const Panel& P = M.panels()[k];
    out.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double s = 0;
        // differences against the diagonal node: exact zero for constants
        const double vi = gf.v[P.first + i];
        for (int j = 0; j < m; ++j)
            if (j != i) s += B.D[i * m + j] * (gf.v[P.first + j] - vi);
        out[i] = s / P.half();
    }
}

/// Nodewise d/dx through the panel polynomials; breakpoints take the mean of both sides.
inline GridFunction derivative(const GridFunction& gf) {
    const Mesh& M = *gf.mesh;
    const int m = M.basis().size();
    GridFunction d{gf.mesh, std::vector<double>(M.size(), 0.0), {}, gf.parity == Parity::even ? Parity::odd : Parity::even};
    std::vector<int> cnt(M.size(), 0);
    std::vector<double> loc;
    for (int k = 0; k < static_cast<int>(M.panels().size()); ++k) {
        const Panel& P = M.panels()[k];
        panel_derivative(gf, k, loc);
        for (int j = 0; j < m; ++j) {
            const int i = P.first + j;
            d.v[i] += P.log ? loc[j] / M.x(i) : loc[j];
            cnt[i] += 1;
        }
    }
    for (int i = 0; i < M.size(); ++i) d.v[i] /= cnt[i];
    if (gf.tail.active)
        d.tail = {true, 0.0, -gf.tail.exponent * gf.tail.amp, gf.tail.exponent + 1.0};
    return d;
}

/// Derivative from the left at x (right-derivative at x = 0).
inline double derivative_left(const GridFunction& gf, double x) {
    const Mesh& M = *gf.mesh;
    if (x > M.x_max()) return -gf.tail.exponent * gf.tail.amp * std::pow(x, -gf.tail.exponent - 1.0);
    const int k = M.panel_of(x);
    const auto& B = M.basis();
    const int m = B.size();
    const Panel& P = M.panels()[k];
    std::vector<double> loc, l;
    panel_derivative(gf, k, loc);
    B.basis(M.to_ref(k, x), l);
    double s = 0;
    for (int j = 0; j < m; ++j) s += l[j] * loc[j];
    return P.log ? s / x : s;
}

/// Value of the panel polynomial at x (no shape preservation).
inline double interpolate_poly(const GridFunction& gf, double x) {
    const Mesh& M = *gf.mesh;
    if (x > M.x_max()) return gf.tail.active ? gf.tail(x) : gf.v.back();
    const int k = M.panel_of(x);
    std::vector<double> l;
    M.basis().basis(M.to_ref(k, x), l);
    double s = 0;
    for (int j = 0; j < M.basis().size(); ++j) s += l[j] * gf.v[M.panels()[k].first + j];
    return s;
}

/// Shape-preserving cubic Hermite interpolation between nodes.  Node slopes
/// come from the panel polynomials and are limited (Fritsch-Carlson) so the
/// interpolant is monotone wherever the node data is.
inline double interpolate(const GridFunction& gf, double x, const GridFunction* slopes = nullptr) {
    const Mesh& M = *gf.mesh;
    if (x < 0) x = -x;
    if (x >= M.x_max()) {
        if (x == M.x_max()) return gf.v.back();
        return gf.tail.active ? gf.tail(x) : gf.v.back();
    }
    const auto& X = M.x();
    auto it = std::upper_bound(X.begin(), X.end(), x);
    const int i = static_cast<int>(it - X.begin()) - 1;
    if (X[i] == x) return gf.v[i];
    const int k = M.panel_of(x);
    const bool lg = M.panels()[k].log;
    // Hermite in the panel variable
    const double x0 = X[i], x1 = X[i + 1];
    const double u0 = lg ? std::log(x0) : x0, u1 = lg ? std::log(x1) : x1, u = lg ? std::log(x) : x;
    const double h = u1 - u0;
    const double f0 = gf.v[i], f1 = gf.v[i + 1];
    double d0, d1;
    if (slopes) {
        d0 = slopes->v[i];
        d1 = slopes->v[i + 1];
    } else {
        std::vector<double> loc;  // d/du in the panel variable
        panel_derivative(gf, k, loc);
        const int f = M.panels()[k].first;
        d0 = loc[i - f];
        d1 = loc[i + 1 - f];
    }
    if (slopes && lg) {
        d0 *= x0;
        d1 *= x1;
    }
    const double delta = (f1 - f0) / h;
    if (delta == 0.0) {
        d0 = d1 = 0.0;
    } else {
        if (d0 * delta < 0) d0 = 0.0;
        if (d1 * delta < 0) d1 = 0.0;
        const double a = d0 / delta, b = d1 / delta, r2 = a * a + b * b;
        if (r2 > 9.0) {
            const double tau = 3.0 / std::sqrt(r2);
            d0 *= tau;
            d1 *= tau;
        }
    }
    const double t = (u - u0) / h, t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
           (t3 - t2) * h * d1;
}

struct TailFit {
    double amp = 0;
    double exponent = 0;
    double residual = 0;  // rms of the log residual
    int n = 0;
};

struct DegenerateWindow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Least squares of ln(value) against ln(x) over nodes in [lo, hi].
inline TailFit fit_tail(const GridFunction& gf, double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int i = 0; i < gf.size(); ++i) {
        const double x = gf.x(i);
        if (x < lo || x > hi) continue;
        if (!(gf.v[i] > 0)) throw DegenerateWindow("fit_tail needs positive values in the window");
        const double lx = std::log(x), ly = std::log(gf.v[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 8) throw DegenerateWindow("fit_tail needs at least 8 nodes in the window");
    const double mx = sx / n, my = sy / n;
    const double slope = (sxy - n * mx * my) / (sxx - n * mx * mx);
    const double icpt = my - slope * mx;
    TailFit r{std::exp(icpt), -slope, 0.0, n};
    double ss = 0;
    for (int i = 0; i < gf.size(); ++i) {
        const double x = gf.x(i);
        if (x < lo || x > hi) continue;
        const double e = std::log(gf.v[i]) - (icpt + slope * std::log(x));
        ss += e * e;
    }
    r.residual = std::sqrt(ss / n);
    return r;
}

/// "%.16e": 17 significant digits, lowercase scientific.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline std::string to_csv(const GridFunction& gf, const std::string& name = "value") {
    std::string s = "x," + name + "\n";
    for (int i = 0; i < gf.size(); ++i) s += fmt17(gf.x(i)) + "," + fmt17(gf.v[i]) + "\n";
    return s;
}

}  // namespace hlfp
