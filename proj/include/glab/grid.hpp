#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace glab {

/// Discretisation flavours supported by the lab.
///
/// radial      : radially symmetric fields on the ball [0, R] in dimension
///               `dim`, Dirichlet condition at r = R, regularity u_r(0) = 0.
/// periodic1d  : one-dimensional torus [-L/2, L/2).
enum class GridKind { radial, periodic1d };

/// Uniform quadrature/collocation grid. Immutable after construction; states
/// hold a shared_ptr so grids can be shared freely between fields,
/// trajectories and reports.
struct Grid {
    GridKind kind;
    int dim;          // spatial dimension N (periodic1d always has dim == 1)
    double extent;    // R for radial grids, L (full period) for periodic ones
    int n;            // number of nodes
    double spacing;   // distance between adjacent nodes

    // Node coordinates. radial: 0 = r_0 < ... < r_{n-1} = R.
    // periodic1d: -L/2 = x_0 < ... < x_{n-1} = L/2 - dx.
    std::vector<double> nodes;

    // Quadrature weights including the surface measure of the unit sphere,
    // so that integrate() approximates the integral over R^N of a radially
    // symmetric function (respectively over one period).
    std::vector<double> weights;

    bool is_radial() const { return kind == GridKind::radial; }
};

/// Surface area |S^{N-1}| of the unit sphere in R^N. The N = 1 value is 2:
/// radial integrals in one dimension follow the even-extension convention
/// int_R f(|x|) dx = 2 int_0^inf f(r) dr.
double sphere_area(int dim);

/// Build a grid. Throws std::invalid_argument for non-positive extent,
/// n < 8, dim < 1, or dim != 1 on periodic grids.
std::shared_ptr<const Grid> make_grid(GridKind kind, int dim, double extent, int n);

/// Trapezoid-type quadrature of nodal samples against the grid weights.
double integrate(const Grid& g, std::span<const double> samples);

/// Complex field sampled on a grid, tagged with the physical time it was
/// taken at. Treated as a value type; solvers return fresh states rather
/// than mutating inputs.
struct FieldState {
    std::shared_ptr<const Grid> grid;
    std::vector<std::complex<double>> values;
    double time = 0.0;
};

/// max_i |u_i|
double sup_norm(const FieldState& u);

/// Weighted l2 mass sum_i w_i |u_i|^2 (the discrete ||u||_2^2).
double mass_of(const FieldState& u);

/// Fraction of mass carried by the outer 5% of a radial grid. Used as a
/// boundary-leak alarm; meaningless (returns 0) for periodic grids.
double outer_mass_fraction(const FieldState& u);

} // namespace glab
