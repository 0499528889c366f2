#pragma once

#include "glab/functionals.hpp"

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace glab {

/// Why a run ended.
enum class StopReason {
    none,
    budget_reached,     // integrated to t_budget
    sup_norm_threshold, // ||u||_inf reached the stop threshold
    dt_underflow,       // step control pushed dt below dt_min
    boundary_leak,      // radial runs: outer 5% of the grid gained mass
};
const char* to_string(StopReason r);

/// Thrown by the nonlinear substep when the pointwise amplitude ODE reaches
/// infinity strictly inside the step. t_star is a first-order estimate of
/// the interior blowup instant, node the offending grid index.
struct SubstepBlowup : std::runtime_error {
    double t_star;
    size_t node;
    SubstepBlowup(double ts, size_t nd)
        : std::runtime_error("nonlinear substep blew up inside the step"),
          t_star(ts),
          node(nd) {}
};

struct RunControls {
    double dt0 = 1e-3;
    double dt_min = 1e-18;
    double t_budget = 1.0;
    double sup_threshold = std::numeric_limits<double>::infinity();
    double c_dt = 0.1; // amplitude guard: dt <= c_dt * ||u||_inf^{-alpha}
    int snapshot_stride = 0;             // store every k-th step (0 = none)
    std::vector<double> snapshot_times;  // exact times to land on and store
    std::vector<double> hit_thresholds;  // record first time sup >= value
    double shift_c = 0.0;                // c for the shifted report entries
    int linear_subcycles = 1;            // Crank-Nicolson sub-steps per step
    double boundary_leak_tol = 1e-8;
};

struct Trajectory {
    EquationParams params;
    RunControls controls;
    std::shared_ptr<const Grid> grid;
    std::vector<FunctionalReport> reports; // one per accepted step, t=0 first
    std::vector<double> ut_sq;             // ||u_t||^2 alongside each report
    std::vector<FieldState> snapshots;
    std::vector<std::pair<double, double>> threshold_hits; // (threshold, time)
    StopReason stop_reason = StopReason::none;
    long steps = 0;
    FieldState final_state;
};

/// Exact flow of u_t = e^{i theta} Lap u over dt. Periodic grids apply the
/// spectral multiplier exp(-e^{i theta} k^2 dt); radial grids take
/// `subcycles` Crank-Nicolson steps of the second-order stencil with the
/// Dirichlet condition at R.
FieldState linear_substep(const FieldState& u, double dt, double theta, int subcycles = 1);

/// Exact pointwise flow of w_t = e^{i theta} f(t) |w|^alpha w + gamma w
/// starting at w.time. Modulus and phase advance in closed form for
/// constant and exponential forcings; other forcings integrate f with
/// 4-point Gauss quadrature. Throws SubstepBlowup if the amplitude leaves
/// every bounded set before t + dt.
FieldState nonlinear_substep(const FieldState& u, double dt, const EquationParams& p);

/// Strang composition: half nonlinear, full linear, half nonlinear. The
/// gamma term rides in the nonlinear substep; the GL2 frame's -e^{i theta} v
/// term commutes with the Laplacian and is applied as an exact scalar
/// factor with the linear substep.
FieldState strang_step(const FieldState& u, double dt, const EquationParams& p,
                       int linear_subcycles = 1);

/// March with dt = min(dt0, c_dt ||u||_inf^{-alpha}), clipped to land
/// exactly on snapshot times and the budget. A substep blowup halves dt and
/// retries; dt < dt_min ends the run.
Trajectory run(const FieldState& initial, const EquationParams& p, const RunControls& controls);

struct BlowupVerdict {
    bool blew_up = false;
    std::optional<double> t_estimate;
    std::pair<double, double> t_bracket{0.0, 0.0};
    double fit_rho = 0.0;
    double fit_residual = 0.0;
    std::string diagnostic;
};

/// Geometric extrapolation of threshold hitting times: with escalating
/// thresholds M_k = M0 2^k hit at times t_k, fit t_k = T - c rho^k from the
/// trailing triples and report the bracket (t_K, T + spread of the last two
/// extrapolants). Non-monotone or non-contracting hitting times yield
/// blew_up = false with a diagnostic.
BlowupVerdict estimate_blowup_time(std::span<const std::pair<double, double>> hits);

/// Same, from runs of identical data that ended at escalating sup-norm
/// thresholds.
BlowupVerdict estimate_blowup_time(std::span<const Trajectory> family);

/// Negative-gamma rescaling onto the unit-coefficient frame: with
/// mu = sqrt(cos(theta)/(-gamma)), maps u(t, x) to
/// v(s, y) = e^{-i s sin theta} mu^{2/alpha} u(mu^2 s, mu y), which solves
/// the GL2 equation. Node layouts map one-to-one, so no interpolation is
/// involved. time_rate = -gamma/cos(theta) converts u-times to v-times.
struct Gl2Frame {
    FieldState state;
    EquationParams params;
    double mu = 1.0;
    double time_rate = 1.0;
};
Gl2Frame to_gl2_frame(const FieldState& u, const EquationParams& p);

/// Residuals of the evolution identities over a stored trajectory.
ResidualReport identity_residuals(const Trajectory& traj);

} // namespace glab
