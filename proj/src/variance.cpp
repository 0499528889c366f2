#include "glab/variance.hpp"

#include "glab/field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace glab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Three-point derivatives on possibly uneven spacing. h1 = t1 - t0,
// h2 = t2 - t1, values z0, z1, z2; both return the derivative at t1.
double diff1(double h1, double h2, double z0, double z1, double z2) {
    return (z2 * h1 * h1 - z0 * h2 * h2 + z1 * (h2 * h2 - h1 * h1)) /
           (h1 * h2 * (h1 + h2));
}

double diff2(double h1, double h2, double z0, double z1, double z2) {
    return 2.0 * (z0 * h2 - z1 * (h1 + h2) + z2 * h1) / (h1 * h2 * (h1 + h2));
}

double largest(std::initializer_list<double> xs) {
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

CknCheck ckn_check(const FieldState& u, const CutoffFamily& family, double mu_tilde,
                   double alpha, double mass_cap, double Const) {
    if (!u.grid || !u.grid->is_radial())
        throw std::invalid_argument("ckn_check: field must live on a radial grid");
    if (u.grid->dim < 2)
        throw std::invalid_argument("ckn_check: estimate needs dimension >= 2");
    if (u.grid->dim != family.dim())
        throw std::invalid_argument("ckn_check: weight family dimension mismatch");
    if (!(alpha > 0.0) || alpha > 4.0)
        throw std::invalid_argument("ckn_check: alpha must lie in (0, 4]");
    if (!(mass_cap > 0.0))
        throw std::invalid_argument("ckn_check: mass cap must be positive");
    const double mass = mass_of(u);
    if (std::sqrt(mass) > mass_cap * (1.0 + 1e-12))
        throw std::invalid_argument("ckn_check: field mass exceeds the cap");

    const Grid& g = *u.grid;
    const auto d = spatial_derivatives(u);
    const double nd = static_cast<double>(g.dim);

    std::vector<double> integrand(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double r = g.nodes[i];
        const double rho2 = std::norm(u.values[i]);
        const double rho_a2 = std::pow(rho2, 0.5 * (alpha + 2.0));
        const double gr2 = std::norm(d.grad[i]);
        integrand[i] = -2.0 * (2.0 - family.psi_rr(r)) * gr2 +
                       mu_tilde * (2.0 * nd - family.lap_psi(r)) * rho_a2 -
                       0.5 * rho2 * family.bilap_psi(r);
    }

    CknCheck out;
    out.lhs = integrate(g, integrand);
    out.kappa = kappa(mu_tilde, family.epsilon(), alpha, g.dim, Const);
    out.holds = out.lhs <= out.kappa;
    return out;
}

VarianceWeight sample_weight(const Grid& g, const CutoffFamily& family) {
    if (g.dim != family.dim())
        throw std::invalid_argument("sample_weight: weight family dimension mismatch");
    VarianceWeight w;
    w.psi.resize(g.n);
    w.psi_r.resize(g.n);
    w.psi_rr.resize(g.n);
    w.lap_psi.resize(g.n);
    w.bilap_psi.resize(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double x = g.nodes[i];
        const double r = std::abs(x);
        w.psi[i] = family.psi(r);
        w.psi_r[i] = (x < 0.0 ? -1.0 : 1.0) * family.psi_r(r);
        w.psi_rr[i] = family.psi_rr(r);
        w.lap_psi[i] = family.lap_psi(r);
        w.bilap_psi[i] = family.bilap_psi(r);
    }
    return w;
}

VarianceWeight quadratic_weight(const Grid& g) {
    VarianceWeight w;
    w.psi.resize(g.n);
    w.psi_r.resize(g.n);
    w.psi_rr.assign(g.n, 2.0);
    w.lap_psi.assign(g.n, 2.0 * g.dim);
    w.bilap_psi.assign(g.n, 0.0);
    for (int i = 0; i < g.n; ++i) {
        const double x = g.nodes[i];
        w.psi[i] = x * x;
        w.psi_r[i] = 2.0 * x;
    }
    return w;
}

VarianceSeries truncated_variance_series(const Trajectory& traj, const VarianceWeight& w) {
    const EquationParams& p = traj.params;
    if (p.variant != EquationVariant::GL || p.gamma != 0.0)
        throw std::invalid_argument(
            "truncated_variance_series: identity covers v_t = e^{i theta}[Lap v + f(t)|v|^a v]; "
            "transform the frame first");
    if (traj.snapshots.size() < 3)
        throw std::invalid_argument("truncated_variance_series: need at least three snapshots");
    if (!traj.grid) throw std::invalid_argument("truncated_variance_series: trajectory has no grid");
    const Grid& g = *traj.grid;
    if (w.psi.size() != static_cast<size_t>(g.n) || w.psi_r.size() != w.psi.size() ||
        w.psi_rr.size() != w.psi.size() || w.lap_psi.size() != w.psi.size() ||
        w.bilap_psi.size() != w.psi.size())
        throw std::invalid_argument("truncated_variance_series: weight samples do not match the grid");

    const double ct = p.cos_theta();
    const double st = p.sin_theta();
    const double a = p.alpha;
    const size_t m = traj.snapshots.size();

    VarianceSeries out;
    out.rows.resize(m);
    std::vector<double> bracket(m); // cos theta block differenced in time

    std::vector<double> buf_zeta(g.n), buf_cos(g.n), buf_ang(g.n), buf_s1(g.n), buf_br(g.n),
        buf_ut(g.n), buf_pot(g.n);
    std::vector<double> s1(m), s2(m), s3(m);

    for (size_t j = 0; j < m; ++j) {
        const FieldState& v = traj.snapshots[j];
        if (v.values.size() != static_cast<size_t>(g.n))
            throw std::invalid_argument("truncated_variance_series: snapshot off the trajectory grid");
        const double f = p.forcing(v.time);
        const double fp = p.forcing.derivative(v.time);
        const auto d = spatial_derivatives(v);

        for (int i = 0; i < g.n; ++i) {
            const double rho2 = std::norm(v.values[i]);
            const double rho_a2 = std::pow(rho2, 0.5 * (a + 2.0));
            const double gr2 = std::norm(d.grad[i]);
            const std::complex<double> vt =
                d.lap[i] + f * std::pow(rho2, 0.5 * a) * v.values[i];
            buf_zeta[i] = w.psi[i] * rho2;
            buf_cos[i] = -w.psi[i] * gr2 + f * w.psi[i] * rho_a2 + 0.5 * rho2 * w.lap_psi[i];
            buf_ang[i] = std::imag(std::conj(v.values[i]) * d.grad[i]) * w.psi_r[i];
            buf_s1[i] = -0.5 * rho2 * w.bilap_psi[i] -
                        a * f / (a + 2.0) * rho_a2 * w.lap_psi[i] + 2.0 * w.psi_rr[i] * gr2;
            buf_br[i] = -2.0 * w.psi[i] * gr2 + (a + 4.0) / (a + 2.0) * f * w.psi[i] * rho_a2 +
                        rho2 * w.lap_psi[i];
            buf_ut[i] = w.psi[i] * std::norm(vt);
            buf_pot[i] = w.psi[i] * rho_a2;
        }

        VarianceRow& row = out.rows[j];
        row.time = v.time;
        row.zeta = integrate(g, buf_zeta);
        row.angular = 2.0 * st * integrate(g, buf_ang);
        row.zeta_p_formula = 2.0 * ct * integrate(g, buf_cos) + row.angular;
        s1[j] = integrate(g, buf_s1);
        bracket[j] = integrate(g, buf_br);
        s2[j] = -2.0 * ct * ct * integrate(g, buf_ut);
        s3[j] = -2.0 * fp / (a + 2.0) * ct * integrate(g, buf_pot);
        row.zeta_p_fd = kNaN;
        row.zeta_pp_formula = kNaN;
        row.zeta_pp_fd = kNaN;
    }

    for (size_t j = 0; j + 1 < m; ++j)
        out.max_dt = std::max(out.max_dt, out.rows[j + 1].time - out.rows[j].time);

    for (size_t j = 1; j + 1 < m; ++j) {
        VarianceRow& row = out.rows[j];
        const double h1 = out.rows[j].time - out.rows[j - 1].time;
        const double h2 = out.rows[j + 1].time - out.rows[j].time;
        if (!(h1 > 0.0) || !(h2 > 0.0))
            throw std::invalid_argument("truncated_variance_series: snapshot times must increase");

        row.zeta_p_fd = diff1(h1, h2, out.rows[j - 1].zeta, row.zeta, out.rows[j + 1].zeta);
        row.zeta_pp_fd = diff2(h1, h2, out.rows[j - 1].zeta, row.zeta, out.rows[j + 1].zeta);
        const double dbdt = diff1(h1, h2, bracket[j - 1], bracket[j], bracket[j + 1]);
        row.zeta_pp_formula = 2.0 * (s1[j] + ct * dbdt + s2[j] + s3[j]);

        const double scale_p =
            largest({row.zeta_p_formula - row.angular, row.angular, row.zeta_p_fd});
        row.residual_p =
            scale_p > 0.0 ? std::abs(row.zeta_p_formula - row.zeta_p_fd) / scale_p : 0.0;
        const double scale_pp = largest(
            {2.0 * s1[j], 2.0 * ct * dbdt, 2.0 * s2[j], 2.0 * s3[j], row.zeta_pp_fd});
        row.residual_pp =
            scale_pp > 0.0 ? std::abs(row.zeta_pp_formula - row.zeta_pp_fd) / scale_pp : 0.0;

        out.max_residual_p = std::max(out.max_residual_p, row.residual_p);
        out.max_residual_pp = std::max(out.max_residual_pp, row.residual_pp);
    }
    return out;
}

VarianceSeries truncated_variance_series(const Trajectory& traj, const CutoffFamily& family) {
    if (!traj.grid) throw std::invalid_argument("truncated_variance_series: trajectory has no grid");
    return truncated_variance_series(traj, sample_weight(*traj.grid, family));
}

void write_csv(const VarianceSeries& series, std::ostream& out) {
    out << "time,zeta,zeta_p_formula,zeta_p_fd,zeta_pp_formula,zeta_pp_fd,"
           "residual_p,residual_pp\n";
    char line[320];
    for (const VarianceRow& r : series.rows) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.time, r.zeta, r.zeta_p_formula, r.zeta_p_fd, r.zeta_pp_formula,
                      r.zeta_pp_fd, r.residual_p, r.residual_pp);
        out << line;
    }
}

} // namespace glab
