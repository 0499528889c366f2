#include "doctest.h"

#include "glab/cutoff.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace glab;

namespace {

// Composite Simpson on [a, b], plenty of panels; the independent check of
// the cached Gauss antiderivatives.
template <class F>
double simpson(F f, double a, double b, int panels = 4000) {
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * h / 3.0;
}

} // namespace

TEST_CASE("bump support and normalisation") {
    CutoffFamily fam(0.5, 3);
    CHECK(fam.h(0.9) == 0.0);
    CHECK(fam.h(1.0) == 0.0);
    CHECK(fam.h(2.0) == 0.0);
    CHECK(fam.h(2.5) == 0.0);
    CHECK(fam.h(1.5) > 0.0);
    CHECK(fam.h_cumulative(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fam.h_cumulative(1.0) == 0.0);
    CHECK(fam.h_cumulative(3.0) == 1.0);

    const double direct = simpson([&](double s) { return fam.h(s); }, 1.0, 2.0);
    CHECK(direct == doctest::Approx(1.0).epsilon(1e-9));

    const double moment = simpson([&](double s) { return s * fam.h(s); }, 1.0, 2.0);
    CHECK(fam.plateau() == doctest::Approx(moment).epsilon(1e-9));
    CHECK(fam.plateau() > 1.0);
    CHECK(fam.plateau() < 2.0);
}

TEST_CASE("bump derivatives agree with finite differences") {
    CutoffFamily fam(0.5, 3);
    const double d = 1e-5;
    for (double s : {1.15, 1.3, 1.5, 1.62, 1.85}) {
        const double fd1 = (fam.h(s + d) - fam.h(s - d)) / (2.0 * d);
        CHECK(fam.h_prime(s) == doctest::Approx(fd1).epsilon(1e-6));
        const double fd2 = (fam.h_prime(s + d) - fam.h_prime(s - d)) / (2.0 * d);
        CHECK(fam.h_second(s) == doctest::Approx(fd2).epsilon(1e-6));
    }
}

TEST_CASE("cumulative integrals match direct quadrature at interior points") {
    CutoffFamily fam(0.25, 2);
    for (double t : {1.1, 1.37, 1.5, 1.74, 1.96}) {
        const double ch = simpson([&](double s) { return fam.h(s); }, 1.0, t);
        CHECK(fam.h_cumulative(t) == doctest::Approx(ch).epsilon(1e-10));
        const double cm = simpson([&](double s) { return s * fam.h(s); }, 1.0, t);
        CHECK(fam.h_first_moment(t) == doctest::Approx(cm).epsilon(1e-10));
    }
}

TEST_CASE("zeta equals its defining integral") {
    CutoffFamily fam(0.5, 3);
    // zeta(t) = t - int_0^t (t - s) h(s) ds; the integrand lives on [1, 2].
    for (double t : {0.3, 1.0, 1.2, 1.5, 1.8, 2.0, 2.7}) {
        const double hi = std::min(t, 2.0);
        const double corr =
            t <= 1.0 ? 0.0 : simpson([&](double s) { return (t - s) * fam.h(s); }, 1.0, hi);
        CHECK(fam.zeta(t) == doctest::Approx(t - corr).epsilon(1e-10));
    }
    CHECK(fam.zeta(0.77) == 0.77); // identity below the bump support
    CHECK(fam.zeta(2.0) == doctest::Approx(fam.zeta(5.0)).epsilon(1e-15));
    CHECK(fam.zeta(5.0) == doctest::Approx(fam.plateau()).epsilon(1e-15));
}

TEST_CASE("zeta derivative ladder is finite-difference consistent") {
    CutoffFamily fam(0.5, 3);
    const double d = 1e-5;
    for (double t : {1.2, 1.5, 1.8}) {
        CHECK(fam.zeta_p(t) ==
              doctest::Approx((fam.zeta(t + d) - fam.zeta(t - d)) / (2 * d)).epsilon(1e-7));
        CHECK(fam.zeta_pp(t) ==
              doctest::Approx((fam.zeta_p(t + d) - fam.zeta_p(t - d)) / (2 * d)).epsilon(1e-6));
        CHECK(fam.zeta_3(t) ==
              doctest::Approx((fam.zeta_pp(t + d) - fam.zeta_pp(t - d)) / (2 * d)).epsilon(1e-6));
        CHECK(fam.zeta_4(t) ==
              doctest::Approx((fam.zeta_3(t + d) - fam.zeta_3(t - d)) / (2 * d)).epsilon(1e-5));
    }
    CHECK(fam.zeta_p(0.5) == 1.0);
    CHECK(fam.zeta_p(2.5) == 0.0);
    CHECK(fam.zeta_pp(0.5) == 0.0);
}

TEST_CASE("weight is exactly quadratic in the core and flat past the shoulder") {
    const double eps = 0.35;
    CutoffFamily fam(eps, 3);
    for (double r : {0.0, 0.5, 1.0, 1.0 / eps - 1e-9}) {
        CHECK(fam.psi(r) == doctest::Approx(r * r).epsilon(1e-14));
        CHECK(fam.psi_r(r) == doctest::Approx(2.0 * r).epsilon(1e-14));
        CHECK(fam.psi_rr(r) == 2.0);
        CHECK(fam.lap_psi(r) == doctest::Approx(6.0).epsilon(1e-14));
        CHECK(fam.bilap_psi(r) == 0.0);
    }
    const double top = fam.plateau() / (eps * eps);
    for (double r : {std::sqrt(2.0) / eps, 2.0 / eps, 5.0 / eps}) {
        CHECK(fam.psi(r) == doctest::Approx(top).epsilon(1e-14));
        CHECK(fam.psi_r(r) == 0.0);
        CHECK(fam.psi_rr(r) == 0.0);
        CHECK(fam.lap_psi(r) == 0.0);
        CHECK(fam.bilap_psi(r) == 0.0);
    }
}

TEST_CASE("radial derivative chain matches finite differences of psi") {
    const double eps = 0.6;
    CutoffFamily fam(eps, 3);
    const double d = 1e-5;
    for (double r = 0.2; r < 2.49; r += 0.07) {
        const double fd1 = (fam.psi(r + d) - fam.psi(r - d)) / (2 * d);
        CHECK(fam.psi_r(r) == doctest::Approx(fd1).epsilon(1e-7));
        const double fd2 = (fam.psi_r(r + d) - fam.psi_r(r - d)) / (2 * d);
        CHECK(fam.psi_rr(r) == doctest::Approx(fd2).epsilon(1e-6));
        // Radial Laplacian assembled from the scalar derivatives.
        CHECK(fam.lap_psi(r) ==
              doctest::Approx(fam.psi_rr(r) + 2.0 / r * fam.psi_r(r)).epsilon(1e-12));
    }
}

TEST_CASE("bi-Laplacian matches a finite-difference Laplacian of lap_psi") {
    const double eps = 0.7;
    const int N = 3;
    CutoffFamily fam(eps, N);
    const double d = 1e-4;
    double worst = 0.0, scale = 0.0;
    for (double r = 0.3; r < 2.2; r += 0.03) {
        const double f0 = fam.lap_psi(r);
        const double fp = fam.lap_psi(r + d), fm = fam.lap_psi(r - d);
        const double fd = (fp - 2 * f0 + fm) / (d * d) + (N - 1) / r * (fp - fm) / (2 * d);
        worst = std::max(worst, std::abs(fd - fam.bilap_psi(r)));
        scale = std::max(scale, std::abs(fam.bilap_psi(r)));
    }
    CHECK(scale > 1.0); // the comparison is not vacuous
    CHECK(worst < 1e-4 * scale);
}

TEST_CASE("curvature defect identity 2 - psi'' = gamma_eps^2") {
    CutoffFamily fam(0.45, 2);
    for (double r = 0.0; r < 4.0; r += 0.05) {
        const double lhs = 2.0 - fam.psi_rr(r);
        const double g = fam.gamma_eps(r);
        CHECK(lhs == doctest::Approx(g * g).epsilon(1e-12));
    }
    CHECK(fam.gamma_eps(0.0) == 0.0);
    CHECK(fam.gamma_eps(10.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("Laplacian of the weight never exceeds its core value") {
    CutoffFamily fam(0.5, 3);
    for (double r = 0.0; r < 5.0; r += 0.01) {
        CHECK(fam.lap_psi(r) <= 6.0 + 1e-14);
    }
    CHECK(fam.lap_psi(0.1) == doctest::Approx(6.0));
    CHECK(fam.lap_psi(4.0) == 0.0);
}

TEST_CASE("error budget formula and gating") {
    const double C = 8.0;
    SUBCASE("subcritical branch") {
        const double mu = 0.7, eps = 0.3, alpha = 2.5;
        const int N = 3;
        const double gate = C * mu * std::pow(eps, 2.0 * (N - 1));
        REQUIRE(gate < 1.0);
        const double want = C * mu * std::pow(eps, N * alpha / 2.0) +
                            C * mu * std::pow(gate, alpha / (4.0 - alpha)) + C * eps * eps;
        CHECK(kappa(mu, eps, alpha, N, C) == doctest::Approx(want).epsilon(1e-14));
    }
    SUBCASE("critical power") {
        const double mu = 2.0, eps = 0.2;
        const int N = 3;
        const double want = C * mu * std::pow(eps, 2.0 * N) + C * eps * eps;
        CHECK(kappa(mu, eps, 4.0, N, C) == doctest::Approx(want).epsilon(1e-14));
    }
    SUBCASE("vanishes with epsilon") {
        CHECK(kappa(1.0, 1e-2, 2.0, 3, C) < kappa(1.0, 1e-1, 2.0, 3, C));
        CHECK(kappa(1.0, 1e-3, 2.0, 3, C) < 1e-4);
    }
    SUBCASE("gate violations and bad arguments throw") {
        CHECK_THROWS_AS(kappa(10.0, 0.9, 2.0, 3, C), std::domain_error); // gate >= 1
        CHECK_THROWS_AS(kappa(1.0, 0.1, 5.0, 3, C), std::domain_error);  // alpha > 4
        CHECK_THROWS_AS(kappa(1.0, 1.5, 2.0, 3, C), std::domain_error);  // eps > 1
        CHECK_THROWS_AS(kappa(-1.0, 0.1, 2.0, 3, C), std::domain_error);
    }
}

TEST_CASE("decay exponent of the scaled budget") {
    // alpha = 2, N = 3, lambda = 3/8: min(9/16, 1/4) = 1/4, delta = 1/2.
    CHECK(kappa_decay_exponent(2.0, 0.375, 3) == doctest::Approx(0.5).epsilon(1e-14));
    // At the critical power only the first entry remains: delta = 2 lambda N.
    CHECK(kappa_decay_exponent(4.0, 0.375, 3) == doctest::Approx(2.25).epsilon(1e-14));
    CHECK_THROWS_AS(kappa_decay_exponent(2.0, 0.25, 3), std::domain_error); // lambda floor
    CHECK_THROWS_AS(kappa_decay_exponent(2.0, 0.5, 3), std::domain_error);  // lambda ceiling
    CHECK_THROWS_AS(kappa_decay_exponent(2.0, 0.4, 1), std::domain_error);  // dim too small
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(CutoffFamily(0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(CutoffFamily(-0.2, 3), std::invalid_argument);
    CHECK_THROWS_AS(CutoffFamily(0.5, 0), std::invalid_argument);
}
