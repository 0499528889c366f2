#pragma once

#include "glab/equation.hpp"
#include "glab/field.hpp"

#include <memory>
#include <span>

namespace glab {

/// Scalar diagnostics of a field at one instant. Algebraic relations that
/// hold exactly (up to roundoff) between the entries:
///   energy   = grad_sq/2 - pot/(alpha+2)
///   nehari   = grad_sq - pot = (alpha+2) energy - (alpha/2) grad_sq
///   energy_c = energy - (shift_c/2) mass
///   nehari_c = nehari - shift_c * mass
///   bca      = grad_sq/2 - (N alpha / (4(alpha+2))) pot
struct FunctionalReport {
    double time = 0.0;
    double mass = 0.0;     // ||u||_2^2
    double grad_sq = 0.0;  // ||grad u||_2^2
    double pot = 0.0;      // ||u||_{alpha+2}^{alpha+2}
    double energy = 0.0;
    double nehari = 0.0;
    double energy_c = 0.0;
    double nehari_c = 0.0;
    double variance = 0.0; // int Psi |u|^2, Psi = |x|^2 on radial grids
    double momentum = 0.0; // Im int (x . grad conj(u)) u
    double bca = 0.0;
    double sup_norm = 0.0;
    double alpha = 0.0;
    double shift_c = 0.0;
};

/// Evaluates reports against a fixed grid. Precomputes the variance weight:
/// |x|^2 on radial grids; on periodic grids the smooth truncated weight
/// Psi(x) (equal to x^2 for |x| <= L/(2 sqrt 2), flat at the edges), since
/// x^2 itself is not well defined on a torus. Construct once per run and
/// reuse; construction samples the weight over the whole grid.
class FunctionalEvaluator {
public:
    FunctionalEvaluator(std::shared_ptr<const Grid> grid, double alpha, double shift_c = 0.0);

    FunctionalReport report(const FieldState& u) const;
    FunctionalReport report(const FieldState& u, const Derivatives& d) const;

    /// ||u_t||_2^2 with u_t reconstructed from the equation's right side.
    double ut_sq(const FieldState& u, const Derivatives& d, const EquationParams& p) const;

    double alpha() const { return alpha_; }
    double shift_c() const { return shift_c_; }
    const Grid& grid() const { return *grid_; }

private:
    std::shared_ptr<const Grid> grid_;
    double alpha_;
    double shift_c_;
    std::vector<double> psi_;   // variance weight per node
    std::vector<double> psi_r_; // its radial/one-dimensional derivative
};

/// One-off convenience wrapper around FunctionalEvaluator.
FunctionalReport report(const FieldState& u, double alpha, double shift_c = 0.0);

/// Right side of the equation evaluated on a state; the solver-consistent
/// reconstruction of u_t used by energy-identity checks.
std::vector<std::complex<double>> time_derivative(const FieldState& u, const Derivatives& d,
                                                  const EquationParams& p);

/// Residuals of the evolution identities along a report series, normalised
/// per row by the largest participating term:
///   mass_law    : d/dt mass = 2 gamma mass - 2 cos(theta) (grad_sq - f pot)
///                 (GL2 frame adds the -2 cos(theta) mass term)
///   energy_law  : d/dt [E - (gamma/2) cos(theta) mass]
///                 = -cos(theta) ||u_t||^2 + gamma sin^2(theta) I
///                 (GL2 frame: d/dt E_{-1} = -cos(theta) ||v_t||^2)
///   nls_mass    : |mass - e^{2 gamma t} mass(0)| / mass(0)      (theta = pi/2)
///   nls_virial_v: d/dt V = -4 M + 2 gamma V                     (theta = pi/2)
///   nls_virial_m: d/dt M = -2 grad_sq + (N alpha/(alpha+2)) f pot + 2 gamma M
/// Entries that do not apply are NaN. Time derivatives of the series use
/// three-point differences, so rows exist only at interior report times.
struct ResidualRow {
    double time = 0.0;
    double mass_law = 0.0;
    double energy_law = 0.0;
    double nls_mass = 0.0;
    double nls_virial_v = 0.0;
    double nls_virial_m = 0.0;
    bool has_ut = false; // energy_law used reconstructed u_t, not a fallback
};

struct ResidualReport {
    std::vector<ResidualRow> rows;
    double max_mass_law = 0.0;
    double max_energy_law = 0.0;
    double max_nls_mass = 0.0;
    double max_nls_virial_v = 0.0;
    double max_nls_virial_m = 0.0;
};

ResidualReport identity_residuals(std::span<const FunctionalReport> reports,
                                  std::span<const double> ut_sq, const EquationParams& p,
                                  int dim);

} // namespace glab
