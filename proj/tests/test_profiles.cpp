#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include <hlfp/profiles.hpp>
#include <hlfp/solver.hpp>

using namespace hlfp;

namespace {

struct Fixture {
    KernelOperator op{make_mesh()};
    SolveResult res;
    ProfileSet raw, ren;
    Fixture() {
        SolveConfig c;
        c.progress_every = 0;
        res = solve(op, c);
        raw = recover(res.f, res.bundle);
        ren = renormalize(raw);
    }
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

}  // namespace

TEST_CASE("profile recovery") {
    const auto& p = fx().raw;
    const auto& b = fx().res.bundle;
    CHECK(p.c_theta - (p.c_l + 2.0 * p.c_omega) == 0.0);
    CHECK(p.c_l == b.b() + b.c());
    CHECK(std::abs(derivative_left(p.U, 0.0) + b.b()) < 1e-8);
    CHECK(derivative_left(p.Omega, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(p.Omega.parity == Parity::odd);
    // -c_omega / c_l = delta_d
    CHECK(std::abs(-p.c_omega / p.c_l - b.delta_d()) < 1e-15);
}

TEST_CASE("renormalization") {
    const auto& p = fx().raw;
    const auto& q = fx().ren;
    CHECK(q.c_omega == -1.0);
    CHECK(std::abs(q.c_omega / q.c_l - p.c_omega / p.c_l) < 1e-15);
    CHECK(std::abs(derivative_left(q.Omega, 0.0) - 1.0) < 1e-10);
    CHECK(q.c_l > 2.0);
    CHECK(q.c_l < 4.53);
    CHECK(std::abs(q.c_l - 2.99870) < 2e-2);
    // Omega'(0) = 1 after the alpha scaling needs beta = 1/alpha
    CHECK(q.alpha * q.beta == doctest::Approx(1.0).epsilon(1e-10));
    // renormalize is idempotent on an already normalized set
    const ProfileSet r2 = renormalize(q);
    CHECK(r2.c_l == doctest::Approx(q.c_l).epsilon(1e-14));
}

TEST_CASE("steady-state equations") {
    const auto& b = fx().res.bundle;
    for (const ProfileSet* p : {&fx().raw, &fx().ren}) {
        const SteadyResiduals s = steady_state_residuals(*p, b.delta_d());
        CHECK(s.omega_eq < 1e-7);
        CHECK(s.v_eq < 1e-7);
        CHECK(s.outpush_min > 0.0);
        CHECK(s.nondeg_cl < 1e-8);
        CHECK(s.nondeg_cw < 1e-8);
    }
}

TEST_CASE("recover refuses a non-fixed point") {
    auto f = sample(fx().op.mesh(), [](double x) { return m0(x); });
    f.match_tail(0.0, 4.0);
    const MapBundle bd = apply_maps(fx().op, f);
    CHECK_THROWS_AS(recover(f, bd), NotConverged);
}

TEST_CASE("plateau fit on exact data") {
    const MeshPtr M = fx().op.mesh();
    auto h = sample(M, [](double x) { return x > 0 ? std::pow(x, -1.5) * (2.0 - 0.3 / x) : 0.0; });
    const PlateauFit p = fit_plateau(h, 1.5, 1.0, 1e3, 1e6);
    CHECK(p.limit == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(p.slope == doctest::Approx(-0.3).epsilon(1e-9));
    CHECK(p.residual < 1e-12);
    CHECK_THROWS_AS(fit_plateau(h, 1.5, 1.0, 2.0, 2.01), FitDegenerate);
}

TEST_CASE("asymptotics") {
    const auto& b = fx().res.bundle;
    const AsymptoticReport a = asymptotics(fx().res.f, b);
    CHECK(a.delta_d >= std::sqrt(10.0) / (8.0 + 2.0 * std::sqrt(10.0)));
    CHECK(a.cm_consistency < 1e-4);
    CHECK(a.r.flatness < 0.01);
    CHECK(a.m.flatness < 0.01);
    CHECK(a.delta_identity < 1e-14);
    CHECK(a.C_r() > 0);
    // a window reaching into small x has not plateaued
    CHECK_THROWS_AS(asymptotics(fx().res.f, b, 0.01, 1e-16, 1e-14), FitDegenerate);
}

TEST_CASE("fixed-point identity for b, c, Q") {
    const BcIdentity id = identity_check_bc(fx().res.bundle);
    CHECK(id.residual < 1e-7);
    CHECK(std::abs(id.k_lhs - id.k_rhs) < 1e-7);
    CHECK(id.k_lhs >= 1.0 - 1e-9);
    CHECK(id.k_bound_lhs >= 0.5);
    CHECK(id.k >= 1.0 + std::sqrt(10.0) / 2.0);
    CHECK(fx().res.bundle.d() >= 1.0 + std::sqrt(10.0) / 4.0);
    // away from a fixed point the identity fails
    auto f = sample(fx().op.mesh(), [](double x) { return m0(x); });
    f.match_tail(0.0, 4.0);
    CHECK(identity_check_bc(apply_maps(fx().op, f)).residual > 1e-3);
}

TEST_CASE("f and m decrease and are convex in x^2") {
    const auto& b = fx().res.bundle;
    for (const GridFunction* g : {&b.f, &b.m}) {
        const GridFunction d = derivative(*g);
        // near x = 0 the values sit within rounding of 1; the nodewise slope is
        // only resolved above eps |g| / (node spacing)
        const double eps = std::numeric_limits<double>::epsilon();
        for (int i = 1; i + 1 < d.size(); ++i)
            REQUIRE(d.v[i] <= 8.0 * eps * std::abs(g->v[i]) / (g->x(i + 1) - g->x(i - 1)));
        // second differences in s = x^2, same scaling as the membership check
        for (int i = 1; i + 1 < g->size(); ++i) {
            const double s0 = g->x(i - 1) * g->x(i - 1), s1 = g->x(i) * g->x(i), s2 = g->x(i + 1) * g->x(i + 1);
            const double d2 = (g->v[i + 1] - g->v[i]) / (s2 - s1) - (g->v[i] - g->v[i - 1]) / (s1 - s0);
            REQUIRE(d2 >= -1e-9 * std::max(1.0, std::abs(g->v[i]) / (s2 - s0)));
        }
    }
}
