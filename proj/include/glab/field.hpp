#pragma once

#include "glab/grid.hpp"

namespace glab {

/// First derivative and Laplacian of a field, sampled on its grid.
///
/// periodic1d grids use exact spectral differentiation. Radial grids use
/// second-order centred differences with the regularity condition
/// u_r(0) = 0 (ghost reflection across the origin) and the Dirichlet
/// convention u = 0 just outside r = R. At r = 0 the Laplacian is the
/// regular limit N * u_rr(0).
struct Derivatives {
    std::vector<std::complex<double>> grad;
    std::vector<std::complex<double>> lap;
};

Derivatives spatial_derivatives(const FieldState& u);

/// u(x) = c * exp(-(|x|/sigma)^2)
FieldState sample_gaussian(std::shared_ptr<const Grid> grid, double c, double sigma);

/// u(x) = c * exp(-((|x|-r0)/sigma)^2)
FieldState sample_ring(std::shared_ptr<const Grid> grid, double c, double r0, double sigma);

/// Normalised Kaplan pairing weight psi_lambda(x) = lambda^N psi(lambda x),
/// psi = w / ||w||_1 with w(x) = exp(-sqrt(N^2 + |x|^2)). The normalisation
/// is performed against the grid quadrature so integrate(psi_lambda) == 1
/// exactly on the grid. The weight satisfies Delta psi_lambda >= -lambda^2
/// psi_lambda, which is what the Kaplan blowup criterion rests on.
FieldState sample_kaplan_weight(std::shared_ptr<const Grid> grid, double lambda);

/// Linear interpolation of a (typically radial) profile onto another grid,
/// scaled by `amplitude`. Query points outside the profile's grid evaluate
/// to zero. Used to place ground-state profiles on evolution grids.
FieldState sample_scaled_profile(std::shared_ptr<const Grid> grid, const FieldState& profile,
                                 double amplitude);

} // namespace glab
