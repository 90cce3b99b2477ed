#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <hlfp/solver.hpp>

using namespace hlfp;

namespace {

const KernelOperator& op() {
    static const KernelOperator k(make_mesh());
    return k;
}

SolveConfig quiet(InitialFunction init) {
    SolveConfig c;
    c.initial = init;
    c.progress_every = 0;
    return c;
}

const SolveResult& from_rational() {
    static const SolveResult r = solve(op(), quiet(InitialFunction::rational_one));
    return r;
}

}  // namespace

TEST_CASE("converges from (1+x^2)^-1 inside the invariant set") {
    const SolveResult& r = from_rational();
    CHECK(r.report.converged);
    CHECK(r.report.iterations <= 500);
    CHECK(r.report.residual_history.back() <= 1e-10);
    CHECK(r.report.weighted_history.back() <= 1e-10);
    CHECK(r.report.monotone_after_20);
    CHECK(std::all_of(r.report.in_set.begin(), r.report.in_set.end(), [](char c) { return c != 0; }));
    CHECK(r.bundle.b() == doctest::Approx(2.5888).epsilon(1e-4));
    CHECK(r.bundle.d() >= 1.0 + std::sqrt(10.0) / 4.0);
}

TEST_CASE("converges from m0, which starts outside the set") {
    SolveConfig c = quiet(InitialFunction::m0);
    c.max_iters = 500;
    const SolveResult r = solve(op(), c);
    CHECK(r.report.converged);
    CHECK(r.report.iterations <= 500);
    REQUIRE(!r.report.in_set.empty());
    CHECK(r.report.in_set.front() == 0);
    CHECK(r.report.first_failed_clause.front() == "lower_bound_m1");
    CHECK(r.report.in_set.back() != 0);
    // same fixed point as from the other start, up to the tolerance scale
    CHECK(residual(r.f, from_rational().f) < 1e-8);
}

TEST_CASE("restart from a fixed point") {
    SolveConfig c = quiet(InitialFunction::file);
    c.initial_data = from_rational().f;
    const SolveResult r = solve(op(), c);
    CHECK(r.report.converged);
    CHECK(r.report.iterations <= 2);
}

TEST_CASE("failure modes carry the report") {
    SolveConfig c = quiet(InitialFunction::rational_one);
    c.max_iters = 5;
    try {
        solve(op(), c);
        FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
        CHECK(e.report.residual_history.size() == 5);
        CHECK(!e.report.converged);
    }
    SolveConfig s = quiet(InitialFunction::m0);
    s.enforcement = Enforcement::enforce;
    CHECK_THROWS_AS(solve(op(), s), InvariantViolation);
    SolveConfig bad = quiet(InitialFunction::rational_one);
    bad.tol_residual = 0;
    CHECK_THROWS_AS(solve(op(), bad), std::invalid_argument);
    CHECK_THROWS_AS(initial_function(op().mesh(), quiet(InitialFunction::file)), std::invalid_argument);
}

TEST_CASE("per-iterate callback") {
    SolveConfig c = quiet(InitialFunction::rational_one);
    c.max_iters = 3;
    std::vector<int> seen;
    c.on_iterate = [&](int it, const MapBundle& bd) {
        seen.push_back(it);
        CHECK(bd.r.size() == op().size());
    };
    CHECK_THROWS_AS(solve(op(), c), NonConvergence);
    CHECK(seen == std::vector<int>{0, 1, 2});
}

TEST_CASE("initial functions") {
    const MeshPtr& M = op().mesh();
    const GridFunction a = initial_function(M, quiet(InitialFunction::rational_one));
    const GridFunction b = initial_function(M, quiet(InitialFunction::m1));
    CHECK(a.v[M->node_of(1.0)] == 0.5);
    CHECK(b.v[M->node_of(1.0)] == doctest::Approx(m0(1.0)));
    CHECK(std::string(to_string(InitialFunction::rational_one)) == "rational-one");
}
