#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <hlfp/solver.hpp>
#include <hlfp/verify.hpp>

using namespace hlfp;

namespace {

const KernelOperator& op() {
    static const KernelOperator k(make_mesh());
    return k;
}

const GridFunction& fixed_point() {
    static const GridFunction f = [] {
        SolveConfig c;
        c.progress_every = 0;
        return solve(op(), c).f;
    }();
    return f;
}

GridFunction m1_fn() {
    const auto& K = constants();
    auto g = sample(op().mesh(), [&](double x) { return K.m1(x); });
    g.match_tail(0.0, 3.0);
    return g;
}

}  // namespace

TEST_CASE("membership of reference functions") {
    const MembershipReport a = check_membership(m1_fn());
    CHECK(a.member);
    CHECK(a.clauses.size() == 7);
    auto f = sample(op().mesh(), [](double x) { return m0(x); });
    const MembershipReport b = check_membership(f);
    CHECK(!b.member);
    CHECK(!b.find("lower_bound_m1")->pass);
    CHECK(b.find("monotone")->pass);
    auto one = sample(op().mesh(), [](double) { return 1.0; });
    const MembershipReport c = check_membership(one);
    CHECK(!c.member);
    CHECK(!c.find("derivative_at_1")->pass);
    CHECK(c.find("upper_bound_1")->pass);
    CHECK(b.find("no_such_clause") == nullptr);
}

TEST_CASE("clause margins are signed") {
    auto f = fixed_point();
    f.v[0] = 1.0 + 1e-6;
    const MembershipReport r = check_membership(f);
    CHECK(!r.find("normalization")->pass);
    CHECK(r.find("normalization")->margin < 0);
    CHECK(!r.find("upper_bound_1")->pass);
    // a bump breaks monotonicity and convexity at its location
    auto g = fixed_point();
    const int k = op().mesh()->node_of(10.0);
    g.v[k] *= 1.5;
    const MembershipReport s = check_membership(g);
    CHECK(!s.find("monotone")->pass);
    CHECK(s.find("monotone")->where == doctest::Approx(g.x(k)));
    CHECK(!s.find("convex_in_x2")->pass);
}

TEST_CASE("fixed point is a member") { CHECK(check_membership(fixed_point()).member); }

TEST_CASE("R preserves membership on convex combinations") {
    const GridFunction m1 = m1_fn();
    const GridFunction& fp = fixed_point();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        const double t = U(rng);
        CAPTURE(t);
        GridFunction f = fp;
        for (int i = 0; i < f.size(); ++i) f.v[i] = t * m1.v[i] + (1.0 - t) * fp.v[i];
        f.match_tail(0.0, std::min(3.0, fp.tail.exponent));
        REQUIRE(check_membership(f).member);
        const MapBundle bd = apply_maps(op(), f);
        CHECK(check_membership(bd.r).member);
    }
}

TEST_CASE("oracle battery") {
    const OracleReport r = run_oracles(op().mesh(), &op());
    CHECK(r.items.size() >= 15);
    for (const auto& it : r.items) {
        CAPTURE(it.name);
        CAPTURE(it.error);
        CHECK(it.pass());
    }
    CHECK(r.all_pass());
}

TEST_CASE("oracle errors under mesh doubling") {
    // errors sit at rounding level; doubling the mesh must not make them worse by more than rounding
    MeshParams p;
    p.refine = 2;
    const OracleReport a = run_oracles(op().mesh(), &op());
    const OracleReport b = run_oracles(make_mesh(p));
    REQUIRE(a.items.size() == b.items.size());
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        CAPTURE(a.items[i].name);
        CHECK(b.items[i].pass());
        CHECK(b.items[i].error <= 1.1 * a.items[i].error + 1e-13);
    }
}
