#include "doctest.h"

#include "glab/functionals.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

using namespace glab;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

// u = 2 exp(-x^2) on the line, alpha = 2. All of these follow from
// int exp(-a x^2) = sqrt(pi/a) and its moment relatives:
//   mass    = 4 int exp(-2x^2)        = 4 sqrt(pi/2)
//   grad_sq = 16 int x^2 exp(-2x^2)   = 4 sqrt(pi/2)
//   pot     = 16 int exp(-4x^2)       = 8 sqrt(pi)
//   var     = 4 int x^2 exp(-2x^2)    = sqrt(pi/2)
const double kMass1d = 4.0 * std::sqrt(pi / 2.0);
const double kGrad1d = 4.0 * std::sqrt(pi / 2.0);
const double kPot1d = 8.0 * std::sqrt(pi);
const double kVar1d = std::sqrt(pi / 2.0);
const double kEnergy1d = 0.5 * kGrad1d - 0.25 * kPot1d;
const double kNehari1d = kGrad1d - kPot1d;

FieldState gaussian_on(std::shared_ptr<const Grid> g) {
    return sample_gaussian(std::move(g), 2.0, 1.0);
}

} // namespace

TEST_CASE("closed-form report entries for a line gaussian") {
    SUBCASE("periodic grid, spectral derivatives") {
        auto g = make_grid(GridKind::periodic1d, 1, 40.0, 1024);
        auto r = report(gaussian_on(g), 2.0);
        CHECK(r.mass == doctest::Approx(kMass1d).epsilon(1e-11));
        CHECK(r.grad_sq == doctest::Approx(kGrad1d).epsilon(1e-11));
        CHECK(r.pot == doctest::Approx(kPot1d).epsilon(1e-11));
        CHECK(r.energy == doctest::Approx(kEnergy1d).epsilon(1e-10));
        CHECK(r.nehari == doctest::Approx(kNehari1d).epsilon(1e-10));
        CHECK(r.variance == doctest::Approx(kVar1d).epsilon(1e-9));
        CHECK(r.momentum == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(r.sup_norm == doctest::Approx(2.0).epsilon(1e-13));
    }
    SUBCASE("radial one-dimensional grid, finite differences") {
        auto g = make_grid(GridKind::radial, 1, 18.0, 3601);
        auto r = report(gaussian_on(g), 2.0);
        CHECK(r.mass == doctest::Approx(kMass1d).epsilon(1e-9));
        CHECK(r.grad_sq == doctest::Approx(kGrad1d).epsilon(1e-4));
        CHECK(r.pot == doctest::Approx(kPot1d).epsilon(1e-9));
        CHECK(r.variance == doctest::Approx(kVar1d).epsilon(1e-9));
        CHECK(r.momentum == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("closed-form report entries for a three-dimensional gaussian") {
    // u = exp(-r^2), N = 3: mass = (pi/2)^{3/2}, grad_sq = 3 mass,
    // pot = (pi/4)^{3/2} at alpha = 2, var = (3/4) mass.
    auto g = make_grid(GridKind::radial, 3, 12.0, 2401);
    auto r = report(sample_gaussian(g, 1.0, 1.0), 2.0);
    const double m = std::pow(pi / 2.0, 1.5);
    CHECK(r.mass == doctest::Approx(m).epsilon(1e-9));
    CHECK(r.grad_sq == doctest::Approx(3.0 * m).epsilon(1e-4));
    CHECK(r.pot == doctest::Approx(std::pow(pi / 4.0, 1.5)).epsilon(1e-9));
    CHECK(r.variance == doctest::Approx(0.75 * m).epsilon(1e-9));
}

TEST_CASE("momentum of a chirped gaussian") {
    // u = 2 exp(-x^2 + i k x^2): Im(u grad conj u) = -2 k x |u|^2, so the
    // weighted sum collapses to -2k int x^2 |u|^2 = -2k var.
    auto g = make_grid(GridKind::periodic1d, 1, 40.0, 2048);
    const double k = 0.5;
    FieldState u;
    u.grid = g;
    u.values.resize(static_cast<size_t>(g->n));
    for (int i = 0; i < g->n; ++i) {
        const double x = g->nodes[static_cast<size_t>(i)];
        u.values[static_cast<size_t>(i)] = 2.0 * std::exp(-x * x) * std::polar(1.0, k * x * x);
    }
    auto r = report(u, 2.0);
    CHECK(r.momentum == doctest::Approx(-2.0 * k * kVar1d).epsilon(1e-9));
}

TEST_CASE("algebraic relations hold for arbitrary fields") {
    auto g = make_grid(GridKind::radial, 3, 8.0, 257);
    FieldState u;
    u.grid = g;
    u.values.resize(static_cast<size_t>(g->n));
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (auto& z : u.values) z = cd(U(rng), U(rng));
    u.values.back() = 0.0;

    const double alpha = 3.0, c = 0.7;
    auto r = FunctionalEvaluator(g, alpha, c).report(u);
    CHECK(r.energy == doctest::Approx(0.5 * r.grad_sq - r.pot / (alpha + 2.0)).epsilon(1e-13));
    CHECK(r.nehari == doctest::Approx(r.grad_sq - r.pot).epsilon(1e-13));
    CHECK(r.nehari ==
          doctest::Approx((alpha + 2.0) * r.energy - 0.5 * alpha * r.grad_sq).epsilon(1e-12));
    CHECK(r.energy_c == doctest::Approx(r.energy - 0.5 * c * r.mass).epsilon(1e-13));
    CHECK(r.nehari_c == doctest::Approx(r.nehari - c * r.mass).epsilon(1e-13));
    CHECK(r.bca ==
          doctest::Approx(0.5 * r.grad_sq - 3.0 * alpha / (4.0 * (alpha + 2.0)) * r.pot)
              .epsilon(1e-12));
    CHECK(r.alpha == alpha);
    CHECK(r.shift_c == c);
}

TEST_CASE("reconstructed time derivative matches the analytic right side") {
    auto g = make_grid(GridKind::periodic1d, 1, 40.0, 1024);
    FieldState u = gaussian_on(g);
    u.time = 0.5;
    auto d = spatial_derivatives(u);

    // Analytic pieces for u = 2 exp(-x^2): u'' = 2(4x^2 - 2)exp(-x^2),
    // |u|^2 u = 8 exp(-3x^2).
    auto analytic = [&](const EquationParams& p) {
        std::vector<cd> ut(u.values.size());
        const cd rot = std::polar(1.0, p.theta);
        const double f = p.forcing(u.time);
        for (int i = 0; i < g->n; ++i) {
            const double x = g->nodes[static_cast<size_t>(i)];
            const double upp = 2.0 * (4.0 * x * x - 2.0) * std::exp(-x * x);
            const double cub = 8.0 * std::exp(-3.0 * x * x);
            const double ui = 2.0 * std::exp(-x * x);
            cd rhs = upp + f * cub;
            if (p.variant == EquationVariant::GL2) rhs -= ui;
            ut[static_cast<size_t>(i)] = rot * rhs;
            if (p.variant == EquationVariant::GL) ut[static_cast<size_t>(i)] += p.gamma * ui;
        }
        return ut;
    };

    auto check_match = [&](const EquationParams& p) {
        auto got = time_derivative(u, d, p);
        auto want = analytic(p);
        double worst = 0.0;
        for (size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
        CHECK(worst < 1e-9);

        FunctionalEvaluator eval(g, p.alpha);
        double acc = 0.0;
        for (size_t i = 0; i < want.size(); ++i)
            acc += g->weights[i] * std::norm(want[i]);
        CHECK(eval.ut_sq(u, d, p) == doctest::Approx(acc).epsilon(1e-10));
    };

    EquationParams heat{2.0, 0.0, 0.0, EquationVariant::GL, Forcing::one()};
    check_match(heat);
    EquationParams forced{2.0, 0.3, 0.6, EquationVariant::GL, Forcing::exponential(0.2)};
    check_match(forced);
    EquationParams frame{2.0, 0.0, 0.6, EquationVariant::GL2, Forcing::one()};
    check_match(frame);
}

TEST_CASE("identity residuals accept a consistent series and flag a broken one") {
    // Synthetic Schrodinger-limit series built to satisfy the exact laws:
    //   mass = m0 e^{2 g t}, grad = g0 e^{2 g t}, pot = p0 e^{2 g t},
    //   momentum = c1 t e^{2 g t} with c1 = -2 g0 + (N a/(a+2)) p0,
    //   variance = (v0 - 2 c1 t^2) e^{2 g t}.
    const double gamma = 0.25, alpha = 2.0;
    const int dim = 1;
    const double m0 = 1.7, g0 = 0.9, p0 = 0.4, v0 = 2.2;
    const double c1 = -2.0 * g0 + dim * alpha / (alpha + 2.0) * p0;

    EquationParams p{alpha, gamma, pi / 2.0, EquationVariant::GL, Forcing::one()};
    REQUIRE(p.is_schrodinger_limit());

    std::vector<FunctionalReport> series;
    for (int k = 0; k <= 200; ++k) {
        const double t = 1e-3 * k;
        const double e = std::exp(2.0 * gamma * t);
        FunctionalReport r;
        r.time = t;
        r.alpha = alpha;
        r.mass = m0 * e;
        r.grad_sq = g0 * e;
        r.pot = p0 * e;
        r.energy = 0.5 * r.grad_sq - r.pot / (alpha + 2.0);
        r.nehari = r.grad_sq - r.pot;
        r.momentum = c1 * t * e;
        r.variance = (v0 - 2.0 * c1 * t * t) * e;
        series.push_back(r);
    }

    auto res = identity_residuals(series, {}, p, dim);
    CHECK(res.max_nls_mass < 1e-12);
    CHECK(res.max_nls_virial_v < 1e-5);
    CHECK(res.max_nls_virial_m < 1e-5);
    CHECK(res.max_mass_law < 1e-5);
    CHECK(std::isnan(res.rows.front().energy_law)); // no ut series supplied

    // Corrupt one sample and the affected rows must light up.
    series[100].variance *= 1.05;
    auto bad = identity_residuals(series, {}, p, dim);
    CHECK(bad.max_nls_virial_v > 1e-2);
}

TEST_CASE("identity residual input validation") {
    EquationParams p{2.0, 0.0, 0.0, EquationVariant::GL, Forcing::one()};
    std::vector<FunctionalReport> two(2);
    CHECK_THROWS_AS(identity_residuals(two, {}, p, 1), std::invalid_argument);

    std::vector<FunctionalReport> three(3);
    three[0].time = 0.0;
    three[1].time = 0.0; // not increasing
    three[2].time = 0.1;
    CHECK_THROWS_AS(identity_residuals(three, {}, p, 1), std::invalid_argument);

    std::vector<double> ut(2);
    three[1].time = 0.05;
    CHECK_THROWS_AS(identity_residuals(three, ut, p, 1), std::invalid_argument);
}
