#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <hlfp/constants.hpp>
#include <hlfp/specfun.hpp>

using namespace hlfp;

namespace {

// mpmath at 40 digits: t, F1, F1', F2, F2', phi
struct Row {
    double t, f1, f1p, f2, f2p, ph;
};
const Row table[] = {
    {1e-3, 6.6666680000005714289e-7, 0.0013333338666670095241, 5.3333344761909841273e-7, 0.0010666671238098285717, 1.9999979999993333329},
    {0.1, 0.0066800574623517517063, 0.13387012083863364421, 0.0053448129888909397707, 0.10712688041894048521, 1.9799329304537848839},
    {0.49, 0.16866887797883750269, 0.72789847326432213938, 0.13545856322399780217, 0.58700473099020295338, 1.474660870121644649},
    {0.51, 0.18360047775753933139, 0.76545860192480883351, 0.14750473909241375594, 0.61778553964605862758, 1.4260156352608081635},
    {0.9, 0.689198107754653507, 2.1786633038834921189, 0.56294737950569800278, 1.8337233894303954585, -0.64999508124979641401},
    {0.999, 0.99239579366032717731, 6.6070131516572297159, 0.82622607018097369822, 6.1126321474307364826, -5.5928019321658996635},
    {1.001, 1.0075976054303207046, 6.5948113201678286096, 0.84042789465280333223, 6.0892284299602675831, -5.6090037369183171428},
    {1.5, 1.6705991301808751561, 0.49570515898018360388, 1.2719048065446424955, 0.17936105279873215429, -0.4141568686511505619},
    {1.99, 1.8220775761835103642, 0.18970685080207119134, 1.3149187607541351151, 0.038651006633536207959, -0.19959420927963203502},
    {2.01, 1.825810455874115484, 0.18362633702497175827, 1.315671698980542399, 0.036664055834227365736, -0.19489939329430871816},
    {10, 1.9933199425376482483, 0.0013387012083863364421, 1.3333065900929136402, 0.000010712688041894048521, -0.0067069546215116127145},
    {1000, 1.9999993333331999999, 1.3333338666670095241e-9, 1.3333333333330666666, 1.0666671238098285717e-15, -6.6666706666695238117e-7},
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("F1, F2, phi against high-precision values") {
    for (const Row& r : table) {
        CAPTURE(r.t);
        // near t = 1 the log is ill-conditioned; 1e-12 relative is what double allows
        const double tol = std::abs(r.t - 1.0) < 0.01 ? 1e-12 : 1e-13;
        CHECK(rel(F1(r.t), r.f1) < tol);
        CHECK(rel(F1_prime(r.t), r.f1p) < tol);
        CHECK(rel(F2(r.t), r.f2) < tol);
        CHECK(rel(F2_prime(r.t), r.f2p) < tol);
        CHECK(rel(phi(r.t), r.ph) < tol);
    }
}

TEST_CASE("endpoint values") {
    CHECK(F1(0.0) == 0.0);
    CHECK(F1(1.0) == 1.0);
    CHECK(F1_prime(0.0) == 0.0);
    CHECK(F2(0.0) == 0.0);
    CHECK(F2(1.0) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(std::abs(F2(1e8) - 4.0 / 3.0) < 1e-10);
    CHECK(std::abs(F1(1e8) - 2.0) < 1e-12);
    CHECK(std::abs(F1(1e6) - (2.0 - F1(1e-6))) < 1e-12);
    CHECK(phi(1.0) == -std::numeric_limits<double>::infinity());
    CHECK(phi(0.0) == 2.0);
    CHECK(phi_inv_scaled(0.0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("derivative poles at t = 1") {
    CHECK_THROWS_AS(F1_prime(1.0), PoleError);
    CHECK_THROWS_AS(F2_prime(1.0), PoleError);
}

TEST_CASE("F1' at 0.5 against a long partial sum") {
    // sum 4n t^{2n-1}/(4n^2-1), 400 terms; tail below t^{800}
    long double s = 0, t = 0.5L, p = t;
    for (int n = 1; n <= 400; ++n) {
        s += 4.0L * n * p / (4.0L * n * n - 1.0L);
        p *= t * t;
    }
    CHECK(rel(F1_prime(0.5), static_cast<double>(s)) < 1e-14);
    CHECK(specfun_detail::series_remainder_bound(0.3) < 1e-15);
}

TEST_CASE("reflection identities at random t in (0,1)") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(1e-4, 1.0 - 1e-4);
    for (int k = 0; k < 500; ++k) {
        const double t = U(rng);
        CAPTURE(t);
        CHECK(std::abs(F1(1.0 / t) - (2.0 - F1(t))) < 1e-12);
        CHECK(rel(F1_prime(1.0 / t), t * t * F1_prime(t)) < 1e-12);
        CHECK(rel(F2_prime(1.0 / t), std::pow(t, 4) * F2_prime(t)) < 1e-12);
    }
    CHECK(rel(F1_prime(3.0), F1_prime(1.0 / 3.0) / 9.0) < 1e-13);
}

TEST_CASE("F1 nondecreasing and F2' nonnegative") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-6.0, 6.0);
    for (int k = 0; k < 500; ++k) {
        double s = std::exp(U(rng)), t = std::exp(U(rng));
        if (s > t) std::swap(s, t);
        CHECK(F1(s) <= F1(t));
        if (t != 1.0) {
            CHECK(F1_prime(t) >= 0.0);
            CHECK(F2_prime(t) >= 0.0);
        }
    }
}

TEST_CASE("d/dt [4t/3 - t F2(1/t)] = t F1'(1/t)") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.05, 0.95);
    auto G = [](double t) { return 4.0 * t / 3.0 - t * F2(1.0 / t); };
    for (int k = 0; k < 100; ++k) {
        const double t = U(rng), h = 1e-5;
        const double fd = (G(t + h) - G(t - h)) / (2 * h);
        CHECK(std::abs(fd - t * F1_prime(1.0 / t)) < 1e-6);
    }
}

TEST_CASE("universal constants") {
    const auto& K = constants();
    const double eta = 1.0 / (std::pow(3.0, 11) * std::pow(2.0, 14) * std::sqrt(2.0));
    CHECK(rel(K.eta, eta) < 1e-15);
    CHECK(K.eta == doctest::Approx(2.4363e-10).epsilon(1e-4));
    CHECK(rel(K.delta0, 54 * eta / (8 + 27 * eta)) < 1e-15);
    // mpmath values
    CHECK(rel(K.t0, 0.83355655960096470) < 1e-14);
    CHECK(rel(K.L0, 2.3993572805154677) < 1e-13);
    CHECK(rel(K.x_star, 1.4772531348702134e10) < 1e-13);
    CHECK(rel(K.d_m1_minus_1, 9.3091302166553743e-32) < 1e-11);
    CHECK(rel(K.delta1, 2.3272825541638436e-32) < 1e-11);
    CHECK(rel(K.delta_rho, K.delta1 / 2) < 1e-15);
    CHECK(rel(K.ln_L1, 5.9727930095125081e10) < 1e-12);
    CHECK(std::abs(phi(K.t0)) < 1e-14);
    CHECK(std::abs(K.int_phi) < 1e-8);
    CHECK(K.L0_error < 1e-10);
    // b(m1) > sqrt(2)/2, visible only through the separately carried excess
    CHECK(K.b_m1_excess > 0.0);
    CHECK(rel(K.b_m1_excess, 1.3165098206291218e-31) < 1e-11);
    CHECK(K.b_m1 >= std::sqrt(0.5));
    CHECK(K.d_m1 >= 1.0);
    for (double v : {K.eta, K.delta0, K.delta1, K.delta_rho, K.L0, K.ln_L1}) CHECK(v > 0.0);
}

TEST_CASE("m1 and g1") {
    const auto& K = constants();
    for (double x : {0.0, 0.5, 3.0, 1e4, 1e9}) CHECK(rel(K.m1(x), m0(x)) < 1e-14);
    for (double x : {0.0, 1.0, 1e5}) CHECK(K.g1(x) == doctest::Approx(1.0 + 0.5 * x * x).epsilon(1e-15));
    const double xl = 1e12;
    CHECK(rel(K.g1(xl), 1.0 + K.K * xl) < 1e-15);
    // continuity at the switch and m1 >= 4/(2+x^2)^2 beyond it
    CHECK(rel(K.m1(K.x_star * (1 + 1e-12)), K.m1(K.x_star * (1 - 1e-12))) < 1e-9);
    for (double x : {2e10, 1e12, 1e15}) {
        const double q = 2.0 + x * x;
        CHECK(K.m1(x) >= 4.0 / (q * q));
    }
}
