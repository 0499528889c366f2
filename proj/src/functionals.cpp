#include "glab/functionals.hpp"

#include "glab/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace glab {

namespace {
using cd = std::complex<double>;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Three-point derivative of a sampled series at the middle node, spacing
// h1 = t1 - t0, h2 = t2 - t1 (not necessarily equal).
double deriv3(double f0, double f1, double f2, double h1, double h2) {
    return (h1 * h1 * f2 + (h2 * h2 - h1 * h1) * f1 - h2 * h2 * f0) / (h1 * h2 * (h1 + h2));
}

double normalised(double lhs, std::initializer_list<double> terms) {
    double den = std::abs(lhs);
    double rhs = 0.0;
    for (double t : terms) {
        rhs += t;
        den = std::max(den, std::abs(t));
    }
    if (den < 1e-30) return 0.0;
    return std::abs(lhs - rhs) / den;
}

} // namespace

FunctionalEvaluator::FunctionalEvaluator(std::shared_ptr<const Grid> grid, double alpha,
                                         double shift_c)
    : grid_(std::move(grid)), alpha_(alpha), shift_c_(shift_c) {
    if (!grid_) throw std::invalid_argument("FunctionalEvaluator: null grid");
    if (!(alpha_ > 0.0)) throw std::invalid_argument("FunctionalEvaluator: alpha must be positive");
    const int n = grid_->n;
    psi_.resize(static_cast<size_t>(n));
    psi_r_.resize(static_cast<size_t>(n));
    if (grid_->is_radial()) {
        for (int i = 0; i < n; ++i) {
            const double r = grid_->nodes[static_cast<size_t>(i)];
            psi_[static_cast<size_t>(i)] = r * r;
            psi_r_[static_cast<size_t>(i)] = 2.0 * r;
        }
    } else {
        // x^2 near the data, smoothly flattened before the torus seam.
        const CutoffFamily fam(2.0 * std::sqrt(2.0) / grid_->extent, 1);
        for (int i = 0; i < n; ++i) {
            const double x = grid_->nodes[static_cast<size_t>(i)];
            psi_[static_cast<size_t>(i)] = fam.psi(std::abs(x));
            psi_r_[static_cast<size_t>(i)] =
                (x < 0.0 ? -1.0 : 1.0) * fam.psi_r(std::abs(x));
        }
    }
}

FunctionalReport FunctionalEvaluator::report(const FieldState& u) const {
    return report(u, spatial_derivatives(u));
}

FunctionalReport FunctionalEvaluator::report(const FieldState& u, const Derivatives& d) const {
    if (u.grid.get() != grid_.get())
        throw std::invalid_argument("FunctionalEvaluator: state grid does not match evaluator");
    const auto& w = grid_->weights;
    const int N = grid_->dim;

    FunctionalReport r;
    r.time = u.time;
    r.alpha = alpha_;
    r.shift_c = shift_c_;
    double mass = 0.0, grad = 0.0, pot = 0.0, var = 0.0, mom = 0.0, sup = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        const double a2 = std::norm(u.values[i]);
        const double amp = std::sqrt(a2);
        mass += w[i] * a2;
        grad += w[i] * std::norm(d.grad[i]);
        pot += w[i] * std::pow(amp, alpha_ + 2.0);
        var += w[i] * psi_[i] * a2;
        mom += 0.5 * w[i] * psi_r_[i] * std::imag(u.values[i] * std::conj(d.grad[i]));
        sup = std::max(sup, amp);
    }
    r.mass = mass;
    r.grad_sq = grad;
    r.pot = pot;
    r.energy = 0.5 * grad - pot / (alpha_ + 2.0);
    r.nehari = grad - pot;
    r.energy_c = r.energy - 0.5 * shift_c_ * mass;
    r.nehari_c = r.nehari - shift_c_ * mass;
    r.variance = var;
    r.momentum = mom;
    r.bca = 0.5 * grad - (N * alpha_ / (4.0 * (alpha_ + 2.0))) * pot;
    r.sup_norm = sup;
    return r;
}

double FunctionalEvaluator::ut_sq(const FieldState& u, const Derivatives& d,
                                  const EquationParams& p) const {
    const auto ut = time_derivative(u, d, p);
    const auto& w = grid_->weights;
    double acc = 0.0;
    for (size_t i = 0; i < w.size(); ++i) acc += w[i] * std::norm(ut[i]);
    return acc;
}

FunctionalReport report(const FieldState& u, double alpha, double shift_c) {
    return FunctionalEvaluator(u.grid, alpha, shift_c).report(u);
}

std::vector<cd> time_derivative(const FieldState& u, const Derivatives& d,
                                const EquationParams& p) {
    const cd rot(std::cos(p.theta), std::sin(p.theta));
    const double f = p.forcing(u.time);
    std::vector<cd> ut(u.values.size());
    for (size_t i = 0; i < u.values.size(); ++i) {
        const cd ui = u.values[i];
        cd rhs = d.lap[i] + f * std::pow(std::abs(ui), p.alpha) * ui;
        if (p.variant == EquationVariant::GL2) rhs -= ui;
        ut[i] = rot * rhs;
        if (p.variant == EquationVariant::GL) ut[i] += p.gamma * ui;
    }
    return ut;
}

ResidualReport identity_residuals(std::span<const FunctionalReport> reports,
                                  std::span<const double> ut_sq, const EquationParams& p,
                                  int dim) {
    if (reports.size() < 3)
        throw std::invalid_argument("identity_residuals: need at least three reports");
    if (!ut_sq.empty() && ut_sq.size() != reports.size())
        throw std::invalid_argument("identity_residuals: ut_sq/report length mismatch");

    const double ct = p.cos_theta();
    const double st = p.sin_theta();
    const bool nls = p.is_schrodinger_limit();
    const bool gl2 = p.variant == EquationVariant::GL2;
    const double gamma = gl2 ? 0.0 : p.gamma;
    const double m0 = reports.front().mass;
    const double t0 = reports.front().time;

    ResidualReport out;
    for (size_t k = 1; k + 1 < reports.size(); ++k) {
        const auto& a = reports[k - 1];
        const auto& b = reports[k];
        const auto& c = reports[k + 1];
        const double h1 = b.time - a.time, h2 = c.time - b.time;
        if (!(h1 > 0.0) || !(h2 > 0.0))
            throw std::invalid_argument("identity_residuals: report times must increase");
        const double f = p.forcing(b.time);

        ResidualRow row;
        row.time = b.time;
        row.has_ut = !ut_sq.empty();

        // (a) mass balance
        {
            const double lhs = deriv3(a.mass, b.mass, c.mass, h1, h2);
            if (gl2)
                row.mass_law = normalised(
                    lhs, {-2.0 * ct * b.grad_sq, 2.0 * ct * f * b.pot, -2.0 * ct * b.mass});
            else
                row.mass_law = normalised(
                    lhs, {2.0 * gamma * b.mass, -2.0 * ct * b.grad_sq, 2.0 * ct * f * b.pot});
        }

        // (b) energy balance; stated for unforced flows only
        if (!ut_sq.empty() && p.forcing.is_one()) {
            if (gl2) {
                const double lhs = deriv3(a.energy + 0.5 * a.mass, b.energy + 0.5 * b.mass,
                                          c.energy + 0.5 * c.mass, h1, h2);
                row.energy_law = normalised(lhs, {-ct * ut_sq[k]});
            } else {
                const double shift = 0.5 * gamma * ct;
                const double lhs = deriv3(a.energy - shift * a.mass, b.energy - shift * b.mass,
                                          c.energy - shift * c.mass, h1, h2);
                row.energy_law =
                    normalised(lhs, {-ct * ut_sq[k], gamma * st * st * b.nehari});
            }
        } else {
            row.energy_law = kNaN;
        }

        // (c), (d) exact Schrodinger-limit laws
        if (nls && !gl2) {
            row.nls_mass = std::abs(b.mass - std::exp(2.0 * gamma * (b.time - t0)) * m0) / m0;
            const double vdot = deriv3(a.variance, b.variance, c.variance, h1, h2);
            row.nls_virial_v =
                normalised(vdot, {-4.0 * b.momentum, 2.0 * gamma * b.variance});
            const double mdot = deriv3(a.momentum, b.momentum, c.momentum, h1, h2);
            const double nd = static_cast<double>(dim);
            row.nls_virial_m =
                normalised(mdot, {-2.0 * b.grad_sq, nd * b.alpha / (b.alpha + 2.0) * f * b.pot,
                                  2.0 * gamma * b.momentum});
        } else {
            row.nls_mass = kNaN;
            row.nls_virial_v = kNaN;
            row.nls_virial_m = kNaN;
        }
        out.rows.push_back(row);
    }

    auto acc_max = [](double& slot, double v) {
        if (!std::isnan(v)) slot = std::max(slot, v);
    };
    for (const auto& row : out.rows) {
        acc_max(out.max_mass_law, row.mass_law);
        acc_max(out.max_energy_law, row.energy_law);
        acc_max(out.max_nls_mass, row.nls_mass);
        acc_max(out.max_nls_virial_v, row.nls_virial_v);
        acc_max(out.max_nls_virial_m, row.nls_virial_m);
    }
    return out;
}

} // namespace glab
