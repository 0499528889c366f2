#include "glab/evolve.hpp"

#include "glab/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace glab {

namespace {

using cd = std::complex<double>;

constexpr double kGx4[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                            0.8611363115940526};
constexpr double kGw4[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                            0.3478548451374538};

// int_0^dt exp(a s) f(t0 + s) ds
double forced_integral(const Forcing& f, double t0, double dt, double a) {
    auto expm1_over = [](double z, double h) {
        // (exp(z*h) - 1)/z, continuous at z = 0
        return z == 0.0 ? h : std::expm1(z * h) / z;
    };
    switch (f.kind) {
        case Forcing::Kind::one:
            return expm1_over(a, dt);
        case Forcing::Kind::exponential:
            return std::exp(f.rate * t0) * expm1_over(a + f.rate, dt);
        case Forcing::Kind::custom: {
            double acc = 0.0;
            const double mid = 0.5 * dt, half = 0.5 * dt;
            for (int q = 0; q < 4; ++q) {
                const double s = mid + half * kGx4[q];
                acc += kGw4[q] * std::exp(a * s) * f.fn(t0 + s);
            }
            return acc * half;
        }
    }
    return dt;
}

FieldState linear_substep_periodic(const FieldState& u, double dt, double theta) {
    const int n = u.grid->n;
    const double L = u.grid->extent;
    const cd rot(std::cos(theta), std::sin(theta));
    std::vector<cd> hat(static_cast<size_t>(n));
    fft::forward(u.values, hat);
    for (int k = 0; k < n; ++k) {
        const int kk = (k <= n / 2) ? k : k - n;
        const double xi = 2.0 * std::numbers::pi * kk / L;
        hat[static_cast<size_t>(k)] *= std::exp(-rot * (xi * xi * dt));
    }
    FieldState out;
    out.grid = u.grid;
    out.values.resize(static_cast<size_t>(n));
    fft::inverse(hat, out.values);
    out.time = u.time + dt;
    return out;
}

// One Crank-Nicolson step of u_t = z Lap u on the radial stencil,
// unknowns 0..n-2, Dirichlet u_{n-1} = 0.
void cn_radial_step(const Grid& g, std::vector<cd>& v, cd z) {
    const int n = g.n;
    const int N = g.dim;
    const double dr = g.spacing;
    const double idr2 = 1.0 / (dr * dr);
    const int m = n - 1; // solved unknowns

    static thread_local std::vector<cd> lo, di, up, rhs, scratch;
    lo.assign(static_cast<size_t>(m), cd(0.0));
    di.assign(static_cast<size_t>(m), cd(0.0));
    up.assign(static_cast<size_t>(m), cd(0.0));
    rhs.assign(static_cast<size_t>(m), cd(0.0));

    const cd half = 0.5 * z;
    // Row 0: regular-origin Laplacian 2N (u1 - u0)/dr^2.
    {
        const double d0 = -2.0 * N * idr2, c0 = 2.0 * N * idr2;
        di[0] = 1.0 - half * d0;
        up[0] = -half * c0;
        rhs[0] = (1.0 + half * d0) * v[0] + half * c0 * v[1];
    }
    for (int i = 1; i < m; ++i) {
        const double r = g.nodes[static_cast<size_t>(i)];
        const double ai = idr2 - (N - 1) / (2.0 * r * dr);
        const double bi = -2.0 * idr2;
        const double ci = idr2 + (N - 1) / (2.0 * r * dr);
        lo[static_cast<size_t>(i)] = -half * ai;
        di[static_cast<size_t>(i)] = 1.0 - half * bi;
        up[static_cast<size_t>(i)] = -half * ci;
        const cd right_nb = (i + 1 < n) ? v[static_cast<size_t>(i) + 1] : cd(0.0);
        rhs[static_cast<size_t>(i)] = half * ai * v[static_cast<size_t>(i) - 1] +
                                      (1.0 + half * bi) * v[static_cast<size_t>(i)] +
                                      half * ci * right_nb;
    }
    // The coupling of row m-1 to the Dirichlet node vanished with u_{n-1}=0.

    // Thomas sweep.
    scratch.assign(static_cast<size_t>(m), cd(0.0));
    cd beta = di[0];
    v[0] = rhs[0] / beta;
    for (int i = 1; i < m; ++i) {
        scratch[static_cast<size_t>(i)] = up[static_cast<size_t>(i) - 1] / beta;
        beta = di[static_cast<size_t>(i)] -
               lo[static_cast<size_t>(i)] * scratch[static_cast<size_t>(i)];
        v[static_cast<size_t>(i)] =
            (rhs[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)] * v[static_cast<size_t>(i) - 1]) /
            beta;
    }
    for (int i = m - 2; i >= 0; --i)
        v[static_cast<size_t>(i)] -= scratch[static_cast<size_t>(i) + 1] * v[static_cast<size_t>(i) + 1];
    v[static_cast<size_t>(n) - 1] = 0.0;
}

} // namespace

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::none: return "none";
        case StopReason::budget_reached: return "budget_reached";
        case StopReason::sup_norm_threshold: return "sup_norm_threshold";
        case StopReason::dt_underflow: return "dt_underflow";
        case StopReason::boundary_leak: return "boundary_leak";
    }
    return "unknown";
}

FieldState linear_substep(const FieldState& u, double dt, double theta, int subcycles) {
    if (!(dt >= 0.0)) throw std::invalid_argument("linear_substep: dt must be nonnegative");
    if (subcycles < 1) throw std::invalid_argument("linear_substep: subcycles must be >= 1");
    if (!u.grid->is_radial()) return linear_substep_periodic(u, dt, theta);

    FieldState out = u;
    const cd z = cd(std::cos(theta), std::sin(theta)) * (dt / subcycles);
    for (int s = 0; s < subcycles; ++s) cn_radial_step(*u.grid, out.values, z);
    out.time = u.time + dt;
    return out;
}

FieldState nonlinear_substep(const FieldState& u, double dt, const EquationParams& p) {
    if (!(dt >= 0.0)) throw std::invalid_argument("nonlinear_substep: dt must be nonnegative");
    const double ct = p.cos_theta();
    const double st = p.sin_theta();
    const double gamma = p.variant == EquationVariant::GL ? p.gamma : 0.0;
    const double a = p.alpha * gamma;
    const double jf = forced_integral(p.forcing, u.time, dt, a);
    const double growth = std::exp(gamma * dt);

    FieldState out = u;
    out.time = u.time + dt;
    for (size_t i = 0; i < out.values.size(); ++i) {
        const cd w = u.values[i];
        const double rho2 = std::norm(w);
        if (rho2 == 0.0) continue;
        const double rho_alpha = std::pow(rho2, 0.5 * p.alpha);
        const double q = p.alpha * ct * jf * rho_alpha;
        if (q >= 1.0) throw SubstepBlowup(u.time + dt / std::max(q, 1.0), i);
        const double l = std::log1p(-q);
        const double amp = growth * std::exp(-l / p.alpha);
        double dphi;
        if (ct == 0.0) {
            dphi = st * rho_alpha * jf;
        } else {
            dphi = -(st / ct) * l / p.alpha;
        }
        out.values[i] = w * std::polar(amp, dphi);
    }
    return out;
}

FieldState strang_step(const FieldState& u, double dt, const EquationParams& p,
                       int linear_subcycles) {
    const double t = u.time;
    FieldState s = nonlinear_substep(u, 0.5 * dt, p);
    s = linear_substep(s, dt, p.theta, linear_subcycles);
    if (p.variant == EquationVariant::GL2) {
        const cd factor = std::exp(-cd(std::cos(p.theta), std::sin(p.theta)) * dt);
        for (auto& z : s.values) z *= factor;
    }
    s.time = t + 0.5 * dt;
    s = nonlinear_substep(s, 0.5 * dt, p);
    s.time = t + dt;
    return s;
}

Trajectory run(const FieldState& initial, const EquationParams& p, const RunControls& controls) {
    p.validate();
    if (!(controls.dt0 > 0.0)) throw std::invalid_argument("run: dt0 must be positive");
    if (!(controls.t_budget > initial.time)) throw std::invalid_argument("run: empty time budget");

    Trajectory traj;
    traj.params = p;
    traj.controls = controls;
    traj.grid = initial.grid;

    FunctionalEvaluator eval(initial.grid, p.alpha, controls.shift_c);

    std::vector<double> snap_times = controls.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    size_t next_snap = 0;
    std::vector<double> thresholds = controls.hit_thresholds;
    std::sort(thresholds.begin(), thresholds.end());
    size_t next_thresh = 0;

    FieldState state = initial;

    auto record = [&](const FieldState& s) {
        auto d = spatial_derivatives(s);
        traj.reports.push_back(eval.report(s, d));
        traj.ut_sq.push_back(eval.ut_sq(s, d, p));
        const double sup = traj.reports.back().sup_norm;
        while (next_thresh < thresholds.size() && sup >= thresholds[next_thresh]) {
            traj.threshold_hits.emplace_back(thresholds[next_thresh], s.time);
            ++next_thresh;
        }
        return sup;
    };

    double sup = record(state);
    if (controls.snapshot_stride > 0) traj.snapshots.push_back(state);
    while (next_snap < snap_times.size() && snap_times[next_snap] <= state.time + 1e-14) {
        if (controls.snapshot_stride <= 0 || traj.snapshots.empty()) traj.snapshots.push_back(state);
        ++next_snap;
    }

    long steps_since_snap = 0;
    while (true) {
        if (sup >= controls.sup_threshold) {
            traj.stop_reason = StopReason::sup_norm_threshold;
            break;
        }
        if (state.time >= controls.t_budget - 1e-13 * std::max(1.0, controls.t_budget)) {
            traj.stop_reason = StopReason::budget_reached;
            break;
        }
        if (state.grid->is_radial() &&
            outer_mass_fraction(state) > controls.boundary_leak_tol) {
            traj.stop_reason = StopReason::boundary_leak;
            break;
        }

        double dt = controls.dt0;
        if (sup > 0.0) dt = std::min(dt, controls.c_dt * std::pow(sup, -p.alpha));
        dt = std::min(dt, controls.t_budget - state.time);
        if (next_snap < snap_times.size())
            dt = std::min(dt, std::max(snap_times[next_snap] - state.time, controls.dt_min));

        // Attempt the step, halving on interior blowup or non-finite output.
        FieldState next;
        bool ok = false;
        while (dt >= controls.dt_min) {
            try {
                next = strang_step(state, dt, p, controls.linear_subcycles);
            } catch (const SubstepBlowup&) {
                dt *= 0.5;
                continue;
            }
            bool finite = true;
            for (const auto& z : next.values) {
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                    finite = false;
                    break;
                }
            }
            if (!finite) {
                dt *= 0.5;
                continue;
            }
            ok = true;
            break;
        }
        if (!ok || next.time <= state.time) {
            traj.stop_reason = StopReason::dt_underflow;
            break;
        }

        state = std::move(next);
        ++traj.steps;
        ++steps_since_snap;
        sup = record(state);

        bool want_snapshot = false;
        if (controls.snapshot_stride > 0 && steps_since_snap >= controls.snapshot_stride) {
            want_snapshot = true;
            steps_since_snap = 0;
        }
        while (next_snap < snap_times.size() &&
               state.time >= snap_times[next_snap] - 1e-12 * std::max(1.0, snap_times[next_snap])) {
            want_snapshot = true;
            ++next_snap;
        }
        if (want_snapshot) traj.snapshots.push_back(state);
    }

    traj.final_state = std::move(state);
    return traj;
}

BlowupVerdict estimate_blowup_time(std::span<const std::pair<double, double>> hits) {
    BlowupVerdict v;
    if (hits.size() < 3) {
        v.diagnostic = "need at least three threshold hitting times";
        return v;
    }
    std::vector<std::pair<double, double>> h(hits.begin(), hits.end());
    std::sort(h.begin(), h.end());
    for (size_t k = 1; k < h.size(); ++k) {
        if (h[k].second < h[k - 1].second) {
            v.diagnostic = "hitting times are not monotone; resolution failure";
            return v;
        }
    }

    // Geometric extrapolation over trailing triples.
    std::vector<double> extrapolants;
    double rho_last = 0.0;
    for (size_t k = 2; k < h.size(); ++k) {
        const double d1 = h[k - 1].second - h[k - 2].second;
        const double d2 = h[k].second - h[k - 1].second;
        if (d1 <= 0.0 || d2 <= 0.0) {
            v.diagnostic = "repeated hitting times; step size did not resolve the thresholds";
            return v;
        }
        const double rho = d2 / d1;
        if (rho > 0.999) {
            v.diagnostic = "hitting-time increments are not contracting";
            return v;
        }
        extrapolants.push_back(h[k].second + d2 * rho / (1.0 - rho));
        rho_last = rho;
    }

    const double t_last = h.back().second;
    double T = std::max(extrapolants.back(), t_last);
    double residual = extrapolants.size() >= 2
                          ? std::abs(extrapolants.back() - extrapolants[extrapolants.size() - 2])
                          : 0.0;
    v.blew_up = true;
    v.t_estimate = T;
    v.t_bracket = {t_last, T + residual};
    v.fit_rho = rho_last;
    v.fit_residual = residual;
    return v;
}

BlowupVerdict estimate_blowup_time(std::span<const Trajectory> family) {
    std::vector<std::pair<double, double>> hits;
    for (const auto& traj : family) {
        if (traj.stop_reason != StopReason::sup_norm_threshold) {
            BlowupVerdict v;
            v.diagnostic = std::string("run ended with ") + to_string(traj.stop_reason) +
                           ", not at its sup-norm threshold";
            return v;
        }
        hits.emplace_back(traj.controls.sup_threshold, traj.reports.back().time);
    }
    return estimate_blowup_time(hits);
}

Gl2Frame to_gl2_frame(const FieldState& u, const EquationParams& p) {
    if (p.variant != EquationVariant::GL)
        throw std::invalid_argument("to_gl2_frame: input must be in the original frame");
    if (!(p.gamma < 0.0)) throw std::invalid_argument("to_gl2_frame: needs gamma < 0");
    if (p.is_schrodinger_limit())
        throw std::invalid_argument("to_gl2_frame: needs theta strictly below pi/2");
    const double ct = p.cos_theta();

    Gl2Frame out;
    out.mu = std::sqrt(ct / (-p.gamma));
    out.time_rate = -p.gamma / ct;
    out.params = p;
    out.params.variant = EquationVariant::GL2;
    out.params.gamma = 0.0;

    const auto& g = *u.grid;
    auto scaled = make_grid(g.kind, g.dim, g.extent / out.mu, g.n);
    out.state.grid = scaled;
    out.state.time = u.time * out.time_rate;
    out.state.values.resize(u.values.size());
    const double amp = std::pow(out.mu, 2.0 / p.alpha);
    const cd phase = std::polar(1.0, -out.state.time * p.sin_theta());
    for (size_t i = 0; i < u.values.size(); ++i) out.state.values[i] = phase * amp * u.values[i];
    return out;
}

ResidualReport identity_residuals(const Trajectory& traj) {
    return identity_residuals(traj.reports, traj.ut_sq, traj.params, traj.grid->dim);
}

} // namespace glab
