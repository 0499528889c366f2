#include "glab/groundstate.hpp"

#include "glab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace glab {

const char* to_string(ShotClass c) {
    switch (c) {
        case ShotClass::crosses_zero: return "crosses_zero";
        case ShotClass::diverges: return "diverges";
        case ShotClass::decayed: return "decayed";
        case ShotClass::inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

// Right side of the first-order system y = (Q, Q'):
//   Q'' = -gamma Q - |Q|^alpha Q - (dim-1) Q' / r.
struct ShotRhs {
    double gamma, alpha;
    int dim;

    void operator()(double r, const double y[2], double dy[2]) const {
        const double q = y[0];
        dy[0] = y[1];
        dy[1] = -gamma * q - std::pow(std::abs(q), alpha) * q;
        if (dim > 1) dy[1] -= (dim - 1) * y[1] / r;
    }
};

// Dormand-Prince 5(4) embedded pair. One step from (r, y) with trial size h;
// returns the fifth-order advance, the embedded error estimate and the
// stage derivatives k1/k7 (k7 equals the derivative at the new point, so it
// doubles as the Hermite slope and the next step's k1).
struct Dp5Step {
    double y5[2];
    double err[2];
    double k1[2];
    double k7[2];
};

Dp5Step dp5_step(const ShotRhs& f, double r, const double y[2], double h) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // Fifth-order weights minus the embedded fourth-order ones.
    static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                            e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                            e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

    Dp5Step s;
    double k1[2], k2[2], k3[2], k4[2], k5[2], k6[2], yt[2];
    f(r, y, k1);
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * a21 * k1[i];
    f(r + c2 * h, yt, k2);
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(r + c3 * h, yt, k3);
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(r + c4 * h, yt, k4);
    for (int i = 0; i < 2; ++i)
        yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(r + c5 * h, yt, k5);
    for (int i = 0; i < 2; ++i)
        yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(r + h, yt, k6);
    for (int i = 0; i < 2; ++i)
        s.y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(r + h, s.y5, s.k7);
    for (int i = 0; i < 2; ++i) {
        s.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                        e7 * s.k7[i]);
        s.k1[i] = k1[i];
    }
    return s;
}

constexpr double kRelTol = 1e-10;
constexpr double kAbsTol = 1e-14;
constexpr double kDecayBar = 1e-12;

// Cubic Hermite evaluation of Q on [r0, r0+h] from endpoint values/slopes.
double hermite(double r0, double h, double q0, double m0, double q1, double m1, double r) {
    const double s = (r - r0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * q0 + (s3 - 2 * s2 + s) * h * m0 +
           (-2 * s3 + 3 * s2) * q1 + (s3 - s2) * h * m1;
}

struct ShotOptions {
    double h_max = 0.0;             // 0 = no cap
    std::vector<double>* fill_nodes = nullptr;  // ascending radii to sample
    std::vector<double>* fill_values = nullptr;
    double stop_below = -1.0;       // end integration once |Q|+|Q'| < value
};

// Core integrator shared by the public shoot() and the profile builder.
ShotOutcome integrate_shot(double eta, double gamma, double alpha, int dim, double r_max,
                           int max_crossings, const ShotOptions& opt) {
    if (!(eta > 0.0)) throw std::invalid_argument("shoot: eta must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("shoot: alpha must be positive");
    if (dim < 1) throw std::invalid_argument("shoot: dim must be >= 1");
    if (!(r_max > 0.0)) throw std::invalid_argument("shoot: r_max must be positive");

    const ShotRhs f{gamma, alpha, dim};
    const double guard = 10.0 * eta;

    // Series start away from r = 0: N Q''(0) = -(gamma eta + eta^{1+alpha}).
    const double qpp0 = -(gamma * eta + std::pow(eta, alpha + 1.0) ) / dim;
    double r = 1e-8;
    double y[2] = {eta + 0.5 * qpp0 * r * r, qpp0 * r};

    size_t fill_at = 0;
    auto fill_through = [&](double r0, double h, double q0, double m0, double q1, double m1) {
        if (!opt.fill_nodes) return;
        while (fill_at < opt.fill_nodes->size() && (*opt.fill_nodes)[fill_at] <= r0 + h + 1e-15) {
            const double rn = (*opt.fill_nodes)[fill_at];
            opt.fill_values->push_back(rn <= r0 ? q0 : hermite(r0, h, q0, m0, q1, m1, rn));
            ++fill_at;
        }
    };
    if (opt.fill_nodes && !opt.fill_nodes->empty() && (*opt.fill_nodes)[0] <= r) {
        opt.fill_values->push_back(eta);
        fill_at = 1;
    }

    ShotOutcome out;
    const double tail_start = 0.75 * r_max;
    double h = std::min(1e-4, r_max / 16);
    if (opt.h_max > 0.0) h = std::min(h, opt.h_max);
    const long max_steps = 400000000L;  // proportional-control loop guard

    for (long step = 0; step < max_steps && r < r_max; ++step) {
        h = std::min(h, r_max - r);
        const Dp5Step s = dp5_step(f, r, y, h);

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double sc = kAbsTol + kRelTol * std::max(std::abs(y[i]), std::abs(s.y5[i]));
            err = std::max(err, std::abs(s.err[i]) / sc);
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        const double r_new = r + h;
        fill_through(r, h, y[0], y[1], s.y5[0], s.k7[0]);

        if (r_new >= tail_start) out.tail_sup = std::max(out.tail_sup, std::abs(s.y5[0]));

        if (y[0] != 0.0 && (std::signbit(y[0]) != std::signbit(s.y5[0])) && s.y5[0] != 0.0) {
            // Secant estimate of the crossing radius inside the step.
            const double rc = r + h * y[0] / (y[0] - s.y5[0]);
            out.crossings.push_back(rc);
            if (out.kind == ShotClass::inconclusive) {
                out.kind = ShotClass::crosses_zero;
                out.r_event = rc;
            }
            if (static_cast<int>(out.crossings.size()) >= max_crossings) {
                out.q_end = s.y5[0];
                out.qp_end = s.y5[1];
                return out;
            }
        }
        if (std::abs(s.y5[0]) > guard) {
            if (out.kind == ShotClass::inconclusive) {
                out.kind = ShotClass::diverges;
                // Bisect the Hermite interpolant for the |Q| = guard radius.
                double a = r, b = r_new;
                for (int it = 0; it < 60 && b - a > 1e-13 * (1.0 + b); ++it) {
                    const double mid = 0.5 * (a + b);
                    const double qm =
                        hermite(r, h, y[0], y[1], s.y5[0], s.k7[0], mid);
                    (std::abs(qm) > guard ? b : a) = mid;
                }
                out.r_event = 0.5 * (a + b);
            }
            out.q_end = s.y5[0];
            out.qp_end = s.y5[1];
            return out;
        }
        if (std::abs(s.y5[0]) + std::abs(s.y5[1]) < kDecayBar && s.y5[0] > 0.0) {
            if (out.kind == ShotClass::inconclusive) {
                out.kind = ShotClass::decayed;
                out.r_event = r_new;
            }
            out.q_end = s.y5[0];
            out.qp_end = s.y5[1];
            return out;
        }
        if (opt.stop_below > 0.0 && std::abs(s.y5[0]) + std::abs(s.y5[1]) < opt.stop_below) {
            out.q_end = s.y5[0];
            out.qp_end = s.y5[1];
            out.r_event = r_new;
            return out;
        }

        r = r_new;
        y[0] = s.y5[0];
        y[1] = s.y5[1];
        h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        if (opt.h_max > 0.0) h = std::min(h, opt.h_max);
    }

    out.q_end = y[0];
    out.qp_end = y[1];
    if (out.kind == ShotClass::inconclusive) out.r_event = r_max;
    return out;
}

} // namespace

ShotOutcome shoot(double eta, double gamma, double alpha, int dim, double r_max,
                  int max_crossings) {
    return integrate_shot(eta, gamma, alpha, dim, r_max, std::max(1, max_crossings), {});
}

GroundState find_ground_state(double gamma, double alpha, int dim, double tol, int grid_n) {
    if (!(gamma < 0.0))
        throw std::invalid_argument("find_ground_state: ground states need gamma < 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("find_ground_state: alpha must be positive");
    if (dim < 1) throw std::invalid_argument("find_ground_state: dim must be >= 1");
    if (!((dim - 2) * alpha < 4.0))
        throw std::invalid_argument("find_ground_state: requires (dim-2)*alpha < 4");
    if (!(tol > 0.0)) throw std::invalid_argument("find_ground_state: tol must be positive");

    const double s = std::sqrt(-gamma);
    const double r_span = 40.0 / s;
    auto classify = [&](double eta) { return shoot(eta, gamma, alpha, dim, r_span).kind; };

    // Hunt the bracket: shots above eta0 cross zero, shots below stay
    // positive (typically tripping the amplitude guard). The equilibrium
    // amplitude (-gamma)^{1/alpha} is the natural starting scale.
    const double eta_lo_limit = 1e-6, eta_hi_limit = 1e6;
    double lo = std::pow(-gamma, 1.0 / alpha);
    ShotClass lo_class = classify(lo);
    while (lo_class == ShotClass::crosses_zero && lo > eta_lo_limit) {
        lo = std::max(eta_lo_limit, lo / 8.0);
        lo_class = classify(lo);
    }
    double hi = std::max(4.0 * lo, 2.0 * std::pow(-gamma, 1.0 / alpha));
    ShotClass hi_class = classify(hi);
    while (hi_class != ShotClass::crosses_zero && hi < eta_hi_limit) {
        lo = hi;  // a non-crossing shot is a sharper lower witness
        hi = std::min(eta_hi_limit, hi * 8.0);
        hi_class = classify(hi);
    }
    if (lo_class == ShotClass::crosses_zero || hi_class != ShotClass::crosses_zero) {
        std::ostringstream msg;
        msg << "find_ground_state: no shooting bracket in [1e-6, 1e6]; eta=" << lo << " -> "
            << to_string(lo_class) << ", eta=" << hi << " -> " << to_string(hi_class);
        throw std::runtime_error(msg.str());
    }

    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;  // bracket at roundoff width
        if (classify(mid) == ShotClass::crosses_zero)
            hi = mid;
        else
            lo = mid;
    }
    const double eta0 = 0.5 * (lo + hi);

    // Sample the profile on a uniform grid. The shot is forced through
    // every node (step cap = spacing) so cubic Hermite fill stays far below
    // the discretisation error of the functionals evaluated later.
    const double r_grid = 30.0 / s;
    const int n = grid_n > 0 ? grid_n : 60001;
    auto grid = make_grid(GridKind::radial, dim, r_grid, n);

    std::vector<double> values;
    values.reserve(static_cast<size_t>(n));
    ShotOptions opt;
    std::vector<double> nodes = grid->nodes;
    opt.fill_nodes = &nodes;
    opt.fill_values = &values;
    opt.h_max = grid->spacing;
    opt.stop_below = 1e-9 * eta0;
    integrate_shot(eta0, gamma, alpha, dim, r_grid, 1, opt);

    // Past the dip of the bisected shot the finite-precision eta error takes
    // over (the trajectory either recrosses zero or climbs back towards the
    // positive equilibrium), so graft the decaying asymptotics
    // Q ~ c r^{-(dim-1)/2} e^{-s r} where Q has fallen to the geometric mean
    // of eta0 and the dip; there the relative contamination is ~ dip/eta0.
    size_t pos_end = 0;
    while (pos_end < values.size() && values[pos_end] > 0.0) ++pos_end;
    if (pos_end < 2) throw std::runtime_error("find_ground_state: profile collapsed at once");
    double dip = values[0];
    for (size_t i = 1; i < pos_end; ++i) dip = std::min(dip, values[i]);
    if (!(dip < 1e-2 * eta0))
        throw std::runtime_error("find_ground_state: bisected shot did not decay");
    const double graft_level = std::sqrt(dip * eta0);
    size_t cut = 0;
    while (cut < pos_end && values[cut] > graft_level) ++cut;
    if (cut < 2 || cut >= pos_end)
        throw std::runtime_error("find_ground_state: no graft point before the tail");
    values.resize(cut + 1);
    const double r_cut = nodes[cut];
    const double q_cut = values[cut];
    for (size_t i = cut + 1; i < static_cast<size_t>(n); ++i) {
        const double r = nodes[i];
        const double geom = dim > 1 ? std::pow(r_cut / r, 0.5 * (dim - 1)) : 1.0;
        values.push_back(q_cut * geom * std::exp(-s * (r - r_cut)));
    }

    GroundState gs;
    gs.gamma = gamma;
    gs.alpha = alpha;
    gs.dim = dim;
    gs.eta0 = eta0;
    gs.profile.grid = grid;
    gs.profile.time = 0.0;
    gs.profile.values.assign(values.begin(), values.end());

    const FunctionalReport rep = report(gs.profile, alpha, gamma);
    gs.well_depth = rep.energy_c;
    gs.nehari_residual = rep.nehari_c;
    return gs;
}

WellThresholds well_thresholds(const GroundState& q, int samples, unsigned seed) {
    if (!q.profile.grid || q.profile.values.empty())
        throw std::invalid_argument("well_thresholds: ground state has no profile");
    const double alpha = q.alpha;
    const double gamma = q.gamma;

    WellThresholds out;
    out.well_depth = q.well_depth;
    out.samples = samples;
    out.min_manifold_energy = std::numeric_limits<double>::infinity();
    out.worst_comparison_slack = -std::numeric_limits<double>::infinity();

    // Evaluate candidates on a coarser grid than the profile's; the Nehari
    // rescaling below is exact algebra on the discrete functionals, so grid
    // resolution only has to resolve the bumps themselves.
    auto grid = make_grid(GridKind::radial, q.dim, 16.0 / std::sqrt(-gamma), 2401);
    FunctionalEvaluator eval(grid, alpha, gamma);

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(0.2, 3.0);
    std::uniform_real_distribution<double> width(0.3, 2.5);
    std::uniform_real_distribution<double> center(0.0, grid->extent / 3.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    bool manifold_ok = true, comparison_ok = true;
    const double scale = std::sqrt(-gamma);
    for (int k = 0; k < samples; ++k) {
        FieldState w = coin(rng) < 0.5
                           ? sample_gaussian(grid, amp(rng), width(rng) / scale)
                           : sample_ring(grid, amp(rng), center(rng), width(rng) / scale);
        FunctionalReport rep = eval.report(w);
        if (!(rep.pot > 0.0)) continue;

        // I_gamma(t w) = t^2 (grad - gamma mass) - t^{alpha+2} pot vanishes at
        // t* = ((grad - gamma mass) / pot)^{1/alpha}.
        const double quad = rep.grad_sq - gamma * rep.mass;
        const double t_star = std::pow(quad / rep.pot, 1.0 / alpha);
        const double t2 = t_star * t_star;
        const double e_manifold =
            0.5 * t2 * quad - std::pow(t_star, alpha + 2.0) * rep.pot / (alpha + 2.0);
        out.min_manifold_energy = std::min(out.min_manifold_energy, e_manifold);
        if (e_manifold < out.well_depth * (1.0 - 1e-3)) manifold_ok = false;

        // Push past the manifold: u = 1.3 t* w has I_gamma < 0; whenever it
        // also sits below the well depth, the comparison inequality
        // I_gamma(u) <= -(well_depth - E_gamma(u)) must hold.
        const double su = 1.3 * t_star;
        const double su2 = su * su;
        const double e_u = 0.5 * su2 * quad - std::pow(su, alpha + 2.0) * rep.pot / (alpha + 2.0);
        const double i_u = su2 * quad - std::pow(su, alpha + 2.0) * rep.pot;
        if (i_u < 0.0 && e_u < out.well_depth) {
            const double slack = i_u + (out.well_depth - e_u);
            out.worst_comparison_slack = std::max(out.worst_comparison_slack, slack);
            if (slack > 1e-9 * (1.0 + std::abs(i_u))) comparison_ok = false;
        }
    }
    out.mountain_pass_check = manifold_ok && comparison_ok;
    return out;
}

} // namespace glab
