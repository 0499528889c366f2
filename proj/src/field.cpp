#include "glab/field.hpp"

#include "glab/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace glab {

namespace {

using cd = std::complex<double>;

// Signed wavenumber of mode k on an n-point torus of period L.
double wavenumber(int k, int n, double L) {
    const int kk = (k <= n / 2) ? k : k - n;
    return 2.0 * std::numbers::pi * kk / L;
}

Derivatives derivatives_periodic(const FieldState& u) {
    const int n = u.grid->n;
    const double L = u.grid->extent;
    std::vector<cd> hat(static_cast<size_t>(n));
    fft::forward(u.values, hat);

    std::vector<cd> ghat(static_cast<size_t>(n)), lhat(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        double xi = wavenumber(k, n, L);
        // The Nyquist mode has no well-defined sign; drop it from the first
        // derivative (standard practice, keeps d/dx of real data real).
        if (n % 2 == 0 && k == n / 2) {
            ghat[static_cast<size_t>(k)] = 0.0;
        } else {
            ghat[static_cast<size_t>(k)] = cd(0.0, xi) * hat[static_cast<size_t>(k)];
        }
        lhat[static_cast<size_t>(k)] = -xi * xi * hat[static_cast<size_t>(k)];
    }
    Derivatives d;
    d.grad.resize(static_cast<size_t>(n));
    d.lap.resize(static_cast<size_t>(n));
    fft::inverse(ghat, d.grad);
    fft::inverse(lhat, d.lap);
    return d;
}

Derivatives derivatives_radial(const FieldState& u) {
    const int n = u.grid->n;
    const int N = u.grid->dim;
    const double dr = u.grid->spacing;
    const auto& v = u.values;

    Derivatives d;
    d.grad.assign(static_cast<size_t>(n), cd(0.0));
    d.lap.assign(static_cast<size_t>(n), cd(0.0));

    // r = 0: u_r = 0 by symmetry, Laplacian limit N u_rr with the reflected
    // ghost u_{-1} = u_1.
    d.lap[0] = 2.0 * N * (v[1] - v[0]) / (dr * dr);

    for (int i = 1; i < n - 1; ++i) {
        const double r = u.grid->nodes[static_cast<size_t>(i)];
        const cd up = (v[static_cast<size_t>(i) + 1] - v[static_cast<size_t>(i) - 1]) / (2.0 * dr);
        const cd upp = (v[static_cast<size_t>(i) + 1] - 2.0 * v[static_cast<size_t>(i)] +
                        v[static_cast<size_t>(i) - 1]) /
                       (dr * dr);
        d.grad[static_cast<size_t>(i)] = up;
        d.lap[static_cast<size_t>(i)] = upp + (N - 1) / r * up;
    }

    // r = R: Dirichlet ghost u(R + dr) = 0, one-sided gradient.
    const size_t last = static_cast<size_t>(n - 1);
    d.grad[last] = (v[last] - v[last - 1]) / dr;
    d.lap[last] = (-2.0 * v[last] + v[last - 1]) / (dr * dr) +
                  (N - 1) / u.grid->extent * d.grad[last];
    return d;
}

} // namespace

Derivatives spatial_derivatives(const FieldState& u) {
    if (!u.grid) throw std::invalid_argument("spatial_derivatives: state has no grid");
    if (u.values.size() != static_cast<size_t>(u.grid->n))
        throw std::invalid_argument("spatial_derivatives: value count does not match grid");
    return u.grid->is_radial() ? derivatives_radial(u) : derivatives_periodic(u);
}

FieldState sample_gaussian(std::shared_ptr<const Grid> grid, double c, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sample_gaussian: sigma must be positive");
    FieldState s;
    s.grid = grid;
    s.values.resize(static_cast<size_t>(grid->n));
    for (int i = 0; i < grid->n; ++i) {
        const double x = grid->nodes[static_cast<size_t>(i)];
        s.values[static_cast<size_t>(i)] = c * std::exp(-(x * x) / (sigma * sigma));
    }
    return s;
}

FieldState sample_ring(std::shared_ptr<const Grid> grid, double c, double r0, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sample_ring: sigma must be positive");
    FieldState s;
    s.grid = grid;
    s.values.resize(static_cast<size_t>(grid->n));
    for (int i = 0; i < grid->n; ++i) {
        const double t = (std::abs(grid->nodes[static_cast<size_t>(i)]) - r0) / sigma;
        s.values[static_cast<size_t>(i)] = c * std::exp(-t * t);
    }
    return s;
}

FieldState sample_kaplan_weight(std::shared_ptr<const Grid> grid, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("sample_kaplan_weight: lambda must be positive");
    const int N = grid->dim;
    std::vector<double> raw(static_cast<size_t>(grid->n));
    for (int i = 0; i < grid->n; ++i) {
        const double r = lambda * std::abs(grid->nodes[static_cast<size_t>(i)]);
        raw[static_cast<size_t>(i)] = std::exp(-std::sqrt(static_cast<double>(N) * N + r * r));
    }
    const double total = integrate(*grid, raw);
    if (!(total > 0.0)) throw std::runtime_error("sample_kaplan_weight: degenerate normalisation");
    FieldState s;
    s.grid = grid;
    s.values.resize(static_cast<size_t>(grid->n));
    for (int i = 0; i < grid->n; ++i)
        s.values[static_cast<size_t>(i)] = raw[static_cast<size_t>(i)] / total;
    return s;
}

FieldState sample_scaled_profile(std::shared_ptr<const Grid> grid, const FieldState& profile,
                                 double amplitude) {
    const auto& pg = *profile.grid;
    FieldState s;
    s.grid = grid;
    s.values.resize(static_cast<size_t>(grid->n));
    for (int i = 0; i < grid->n; ++i) {
        const double r = std::abs(grid->nodes[static_cast<size_t>(i)]);
        cd val(0.0);
        if (r <= pg.nodes.back()) {
            const auto it = std::upper_bound(pg.nodes.begin(), pg.nodes.end(), r);
            size_t hi = std::min<size_t>(static_cast<size_t>(it - pg.nodes.begin()),
                                         pg.nodes.size() - 1);
            if (hi == 0) hi = 1;
            const size_t lo = hi - 1;
            const double t = (r - pg.nodes[lo]) / (pg.nodes[hi] - pg.nodes[lo]);
            val = (1.0 - t) * profile.values[lo] + t * profile.values[hi];
        }
        s.values[static_cast<size_t>(i)] = amplitude * val;
    }
    return s;
}

} // namespace glab
