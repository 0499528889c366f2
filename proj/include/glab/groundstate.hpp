#pragma once

#include "glab/grid.hpp"

#include <vector>

namespace glab {

/// How a radial shot Q'' + ((dim-1)/r) Q' + gamma Q + |Q|^alpha Q = 0,
/// Q(0) = eta, Q'(0) = 0 ends.
enum class ShotClass {
    crosses_zero,  // Q changed sign
    diverges,      // |Q| exceeded the amplitude guard 10 * eta
    decayed,       // |Q| + |Q'| fell below 1e-12 with Q > 0
    inconclusive,  // reached r_max without any of the above
};
const char* to_string(ShotClass c);

struct ShotOutcome {
    ShotClass kind = ShotClass::inconclusive;
    double r_event = 0.0;  // first crossing / guard radius; r_max if inconclusive
    double q_end = 0.0;    // Q at the end of integration
    double qp_end = 0.0;   // Q' at the end of integration

    // All zero crossings observed before stopping. shoot() stops at the
    // first one unless asked for more, so this usually has one entry.
    std::vector<double> crossings;

    // sup |Q| over the trailing quarter of the integrated range; lets the
    // caller see decaying oscillation envelopes (positive gamma shots).
    double tail_sup = 0.0;
};

/// Integrate one shot with an adaptive embedded Runge-Kutta pair
/// (relative tolerance 1e-10). The 1/r singularity is removed by a series
/// start Q(r0) = eta + Q''(0) r0^2 / 2 with N Q''(0) = -(gamma eta + |eta|^alpha eta).
/// `max_crossings` > 1 keeps integrating past zero crossings (to observe
/// oscillation, e.g. for gamma > 0) until that many were seen or another
/// guard fires.
ShotOutcome shoot(double eta, double gamma, double alpha, int dim, double r_max,
                  int max_crossings = 1);

/// Positive radial solution of -Lap Q - gamma Q = |Q|^alpha Q together with
/// its potential-well data. The shifted functionals use c = gamma:
///   E_gamma(w) = grad_sq/2 - pot/(alpha+2) - (gamma/2) mass
///   I_gamma(w) = grad_sq - pot - gamma mass
struct GroundState {
    double gamma = -1.0;
    double alpha = 2.0;
    int dim = 1;
    double eta0 = 0.0;        // Q(0)
    FieldState profile;       // real samples on a radial grid
    double well_depth = 0.0;  // E_gamma(Q)
    double nehari_residual = 0.0;  // I_gamma(Q), zero up to discretisation
};

/// Shooting + bisection construction of the ground state. The bracket is
/// hunted inside [1e-6, 1e6]: shots that cross zero sit above eta0, shots
/// that stay positive sit below (small eta trips the amplitude guard while
/// climbing towards the Q = (-gamma)^{1/alpha} equilibrium). Bisection runs
/// until the eta bracket is below tol. The returned profile is sampled on a
/// uniform radial grid reaching ~30/sqrt(-gamma), with the far tail patched
/// by the r^{-(dim-1)/2} exp(-sqrt(-gamma) r) asymptotics once the dip of
/// the shot is reached.
///
/// Throws std::invalid_argument when gamma >= 0 or (dim-2) alpha >= 4, and
/// std::runtime_error (with both endpoint classifications) when no bracket
/// exists inside the eta search range.
GroundState find_ground_state(double gamma, double alpha, int dim, double tol = 1e-10,
                              int grid_n = 0 /* 0 = pick automatically */);

/// Potential-well checks around a computed ground state.
struct WellThresholds {
    double well_depth = 0.0;        // E_gamma(Q)
    bool mountain_pass_check = false;
    double min_manifold_energy = 0.0;   // min E_gamma over sampled Nehari fields
    double worst_comparison_slack = 0.0;  // max of I + (depth - E) over deep samples
    int samples = 0;
};

/// Samples random radial bumps w, rescales each to the Nehari manifold
/// (t* w with I_gamma(t* w) = 0) and confirms the minimality of E_gamma(Q):
/// min E_gamma(t* w) >= well_depth * (1 - 1e-3). Scaled-up copies of the
/// same fields (which have I_gamma < 0 and E_gamma below the well depth)
/// additionally verify I_gamma(u) <= -(well_depth - E_gamma(u)) + tol.
WellThresholds well_thresholds(const GroundState& q, int samples = 100,
                               unsigned seed = 0x9e3779b9u);

} // namespace glab
