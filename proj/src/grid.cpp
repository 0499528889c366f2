#include "glab/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace glab {

double sphere_area(int dim) {
    if (dim < 1) throw std::invalid_argument("sphere_area: dim must be >= 1");
    // |S^{N-1}| = 2 pi^{N/2} / Gamma(N/2); N = 1 gives 2 (even extension).
    const double nd = static_cast<double>(dim);
    return 2.0 * std::pow(std::numbers::pi, 0.5 * nd) / std::tgamma(0.5 * nd);
}

std::shared_ptr<const Grid> make_grid(GridKind kind, int dim, double extent, int n) {
    if (!(extent > 0.0)) throw std::invalid_argument("make_grid: extent must be positive");
    if (n < 8) throw std::invalid_argument("make_grid: need at least 8 nodes");
    if (dim < 1) throw std::invalid_argument("make_grid: dim must be >= 1");
    if (kind == GridKind::periodic1d && dim != 1)
        throw std::invalid_argument("make_grid: periodic1d grids are one-dimensional");

    auto g = std::make_shared<Grid>();
    g->kind = kind;
    g->dim = dim;
    g->extent = extent;
    g->n = n;
    g->nodes.resize(static_cast<size_t>(n));
    g->weights.resize(static_cast<size_t>(n));

    if (kind == GridKind::radial) {
        // Nodes cover [0, R] inclusive; the last node carries the Dirichlet
        // boundary. Composite trapezoid against the measure |S^{N-1}| r^{N-1} dr.
        const double dr = extent / (n - 1);
        g->spacing = dr;
        const double area = sphere_area(dim);
        for (int i = 0; i < n; ++i) {
            const double r = i * dr;
            g->nodes[static_cast<size_t>(i)] = r;
            const double tz = (i == 0 || i == n - 1) ? 0.5 * dr : dr;
            g->weights[static_cast<size_t>(i)] = area * std::pow(r, dim - 1) * tz;
        }
    } else {
        const double dx = extent / n;
        g->spacing = dx;
        for (int i = 0; i < n; ++i) {
            g->nodes[static_cast<size_t>(i)] = -0.5 * extent + i * dx;
            g->weights[static_cast<size_t>(i)] = dx;
        }
    }
    return g;
}

double integrate(const Grid& g, std::span<const double> samples) {
    if (samples.size() != g.weights.size())
        throw std::invalid_argument("integrate: sample count does not match grid");
    double acc = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) acc += g.weights[i] * samples[i];
    return acc;
}

double sup_norm(const FieldState& u) {
    double m = 0.0;
    for (const auto& z : u.values) m = std::max(m, std::abs(z));
    return m;
}

double mass_of(const FieldState& u) {
    const auto& w = u.grid->weights;
    double acc = 0.0;
    for (size_t i = 0; i < w.size(); ++i) acc += w[i] * std::norm(u.values[i]);
    return acc;
}

double outer_mass_fraction(const FieldState& u) {
    if (!u.grid->is_radial()) return 0.0;
    const auto& w = u.grid->weights;
    const size_t n = w.size();
    const size_t first_outer = n - std::max<size_t>(1, n / 20);
    double total = 0.0, outer = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double m = w[i] * std::norm(u.values[i]);
        total += m;
        if (i >= first_outer) outer += m;
    }
    return total > 0.0 ? outer / total : 0.0;
}

} // namespace glab
