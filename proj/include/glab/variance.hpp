#pragma once

#include "glab/cutoff.hpp"
#include "glab/evolve.hpp"

#include <iosfwd>
#include <vector>

namespace glab {

/// Localised interpolation estimate on one radial field:
///
///   lhs = -2 int (2 - Psi_eps'') |u_r|^2
///         + mu int (2N - Lap Psi_eps) |u|^{alpha+2}
///         - 1/2 int |u|^2 Lap^2 Psi_eps
///
/// holds iff lhs <= kappa(mu, eps, alpha, N, Const). The estimate is stated
/// for dimension >= 2, alpha <= 4 and ||u||_2 <= mass_cap.
struct CknCheck {
    double lhs = 0.0;
    double kappa = 0.0;
    bool holds = false;
};

CknCheck ckn_check(const FieldState& u, const CutoffFamily& family, double mu_tilde,
                   double alpha, double mass_cap, double Const = kCknConst);

/// Nodal samples of a variance weight and the derivatives the identity
/// needs. psi_r is the signed derivative (odd on periodic grids), the rest
/// are even in the node coordinate.
struct VarianceWeight {
    std::vector<double> psi;
    std::vector<double> psi_r;
    std::vector<double> psi_rr;    // second radial derivative
    std::vector<double> lap_psi;   // Laplacian in the grid's dimension
    std::vector<double> bilap_psi; // bi-Laplacian
};

/// Sample a truncated weight family on a grid. The family's dimension must
/// match the grid's.
VarianceWeight sample_weight(const Grid& g, const CutoffFamily& family);

/// The untruncated weight Psi = |x|^2. Only meaningful on radial grids,
/// where it reproduces the plain variance; handy as a cross-check against
/// the virial identities.
VarianceWeight quadratic_weight(const Grid& g);

/// One snapshot of the truncated variance zeta(t) = int Psi |v|^2 together
/// with both routes to its derivatives. Formula columns evaluate the
/// identities
///
///   zeta'/2  = cos(th) int { -Psi |v_r|^2 + f Psi |v|^{a+2} + |v|^2 Lap Psi / 2 }
///              + sin(th) Im int conj(v) (grad v . grad Psi)
///   zeta''/2 = int { -|v|^2 Lap^2 Psi / 2 - (a f/(a+2)) |v|^{a+2} Lap Psi
///              + 2 Psi'' |v_r|^2 }
///              + cos(th) d/dt int { -2 Psi |v_r|^2
///              + ((a+4)/(a+2)) f Psi |v|^{a+2} + |v|^2 Lap Psi }
///              - 2 cos^2(th) int Psi |v_t|^2
///              - (2 f'/(a+2)) cos(th) int Psi |v|^{a+2}
///
/// with v_t reconstructed from the equation and the d/dt bracket taken by
/// three-point differencing across snapshots. The fd columns differentiate
/// the measured zeta series directly, so the two routes share nothing past
/// the snapshots themselves. Columns needing neighbours are NaN on the
/// first and last rows.
struct VarianceRow {
    double time = 0.0;
    double zeta = 0.0;
    double zeta_p_formula = 0.0;
    double zeta_p_fd = 0.0;
    double zeta_pp_formula = 0.0;
    double zeta_pp_fd = 0.0;
    double angular = 0.0;     // the sin(th) block's contribution to zeta'
    double residual_p = 0.0;  // |formula - fd| over the largest participant
    double residual_pp = 0.0;
};

struct VarianceSeries {
    std::vector<VarianceRow> rows;
    double max_residual_p = 0.0;  // over interior rows
    double max_residual_pp = 0.0;
    double max_dt = 0.0; // widest snapshot gap; fd error scales with its square
};

/// Evaluate the identity along a stored trajectory of
/// v_t = e^{i theta} [Lap v + f(t) |v|^alpha v]. Trajectories of other
/// frames (gamma != 0, or the GL2 variant) must be transformed first; they
/// are rejected. Needs at least three snapshots.
VarianceSeries truncated_variance_series(const Trajectory& traj, const VarianceWeight& w);
VarianceSeries truncated_variance_series(const Trajectory& traj, const CutoffFamily& family);

/// CSV rows (time, zeta, zeta_p_formula, zeta_p_fd, zeta_pp_formula,
/// zeta_pp_fd, residual_p, residual_pp) with a header line.
void write_csv(const VarianceSeries& series, std::ostream& out);

} // namespace glab
