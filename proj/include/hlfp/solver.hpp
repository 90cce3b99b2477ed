#pragma once
/// Plain Picard iteration f <- R(f).

#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "maps.hpp"
#include "verify.hpp"

namespace hlfp {

enum class InitialFunction { rational_one, m0, m1, file };
/// off: no checks; log_only: record membership; enforce_after_entry: abort if an
/// iterate leaves the set once one has entered it; enforce: abort on any miss.
enum class Enforcement { off, log_only, enforce_after_entry, enforce };

struct SolveConfig {
    double tol_residual = 1e-10;
    int max_iters = 2000;
    InitialFunction initial = InitialFunction::rational_one;
    std::optional<GridFunction> initial_data;  // for InitialFunction::file
    MeshParams mesh;
    Enforcement enforcement = Enforcement::enforce_after_entry;
    MembershipTolerances membership_tol;
    double damping = 1.0;          // f <- (1 - damping) f + damping R(f)
    double min_tail_excess = 0.05; // tails with exponent < 1 + this are cut at x_max
    int progress_every = 10;       // stderr line every n iterations, 0 = silent
    std::function<void(int, const MapBundle&)> on_iterate;  // called with each evaluated iterate
};

struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history;
    std::vector<double> weighted_history;
    std::vector<char> in_set;  // membership of each iterate
    std::vector<std::string> first_failed_clause;
    Functionals final;
    bool converged = false;
    bool monotone_after_20 = true;  // residual strictly decreasing after iteration 20
};

struct NonConvergence : std::runtime_error {
    SolveReport report;
    NonConvergence(const std::string& w, SolveReport r) : std::runtime_error(w), report(std::move(r)) {}
};

struct InvariantViolation : std::runtime_error {
    SolveReport report;
    InvariantViolation(const std::string& w, SolveReport r) : std::runtime_error(w), report(std::move(r)) {}
};

inline GridFunction initial_function(const MeshPtr& mesh, const SolveConfig& cfg) {
    switch (cfg.initial) {
    case InitialFunction::rational_one: {
        auto f = sample(mesh, [](double x) { return 1.0 / (1.0 + x * x); });
        f.match_tail(0.0, 2.0);
        return f;
    }
    case InitialFunction::m0: {
        auto f = sample(mesh, [](double x) { return m0(x); });
        f.match_tail(0.0, 4.0);
        return f;
    }
    case InitialFunction::m1: {
        const auto& K = constants();
        auto f = sample(mesh, [&](double x) { return K.m1(x); });
        f.match_tail(0.0, 3.0);
        return f;
    }
    case InitialFunction::file:
        if (!cfg.initial_data) throw std::invalid_argument("initial function 'file' needs data");
        {
            const GridFunction& src = *cfg.initial_data;
            if (src.mesh->x() == mesh->x()) {
                GridFunction f = src;
                f.mesh = mesh;
                return f;
            }
            auto f = sample(mesh, [&](double x) { return interpolate(src, x); }, src.tail);
            return f;
        }
    }
    throw std::invalid_argument("unknown initial function");
}

inline const char* to_string(InitialFunction f) {
    switch (f) {
    case InitialFunction::rational_one: return "rational-one";
    case InitialFunction::m0: return "m0";
    case InitialFunction::m1: return "m1";
    case InitialFunction::file: return "file";
    }
    return "?";
}

struct SolveResult {
    GridFunction f;   // last iterate, with ||f - R(f)|| <= tol when converged
    MapBundle bundle; // maps evaluated at f
    SolveReport report;
};

/// Iterates until both the sup norm and the weighted norm of f - R(f) drop below
/// tol_residual.  Throws NonConvergence (report attached) after max_iters.
inline SolveResult solve(const KernelOperator& op, const SolveConfig& cfg) {
    if (!(cfg.tol_residual > 0) || cfg.max_iters < 1) throw std::invalid_argument("bad solver config");
    const auto& K = constants();
    SolveReport rep;
    GridFunction f = initial_function(op.mesh(), cfg);
    bool entered = false;
    for (int it = 0; it < cfg.max_iters; ++it) {
        MapBundle bd = apply_maps(op, f);
        const double res = residual(f, bd.r);
        const double wres = weighted_residual(f, bd.r, K.delta_rho);
        rep.residual_history.push_back(res);
        rep.weighted_history.push_back(wres);
        if (it > 20 && res >= rep.residual_history[it - 1]) rep.monotone_after_20 = false;
        rep.iterations = it;
        rep.final = bd.fx;
        if (cfg.on_iterate) cfg.on_iterate(it, bd);
        if (cfg.enforcement != Enforcement::off) {
            const MembershipReport mr = check_membership(f, cfg.membership_tol);
            rep.in_set.push_back(mr.member);
            std::string failed;
            for (const auto& c : mr.clauses)
                if (!c.pass) {
                    failed = c.name;
                    break;
                }
            rep.first_failed_clause.push_back(failed);
            const bool must = cfg.enforcement == Enforcement::enforce ||
                              (cfg.enforcement == Enforcement::enforce_after_entry && entered);
            if (must && !mr.member)
                throw InvariantViolation("iterate " + std::to_string(it) + " left the invariant set (" + failed + ")", rep);
            entered = entered || mr.member;
        }
        if (cfg.progress_every > 0 && (it % cfg.progress_every == 0 || (res <= cfg.tol_residual && wres <= cfg.tol_residual)))
            std::fprintf(stderr, "iter %4d  residual %.3e  weighted %.3e  b %.12f  c %.12f  d %.12f\n", it, res, wres,
                         bd.b(), bd.c(), bd.d());
        if (res <= cfg.tol_residual && wres <= cfg.tol_residual) {
            rep.converged = true;
            return {f, std::move(bd), std::move(rep)};
        }
        GridFunction next = bd.r;
        if (cfg.damping != 1.0) {
            for (int i = 0; i < next.size(); ++i) next.v[i] = (1.0 - cfg.damping) * f.v[i] + cfg.damping * next.v[i];
            next.match_tail(0.0, next.tail.exponent);
        }
        // early iterates can have d close to 1 and a barely integrable tail; cut it at x_max then
        if (next.tail.exponent < 1.0 + cfg.min_tail_excess) next.tail.active = false;
        f = std::move(next);
    }
    rep.iterations = cfg.max_iters;
    throw NonConvergence("no convergence in " + std::to_string(cfg.max_iters) + " iterations", rep);
}

inline SolveResult solve(const SolveConfig& cfg) {
    KernelOperator op(make_mesh(cfg.mesh));
    return solve(op, cfg);
}

}  // namespace hlfp
