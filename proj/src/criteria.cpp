#include "glab/criteria.hpp"

#include "glab/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace glab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Brackets the first sign change of f on [0, t_max] by a forward sweep,
/// then bisects. Criteria envelopes start positive and the sweep is fine
/// enough that the bracketed change is the first crossing.
template <class F>
std::optional<double> first_root_on(F&& f, double t_max) {
    if (f(0.0) <= 0.0) return 0.0;
    const int sweep = 200000;
    const double step = t_max / sweep;
    double prev = 0.0;
    for (int k = 1; k <= sweep; ++k) {
        const double t = k * step;
        if (f(t) <= 0.0) {
            double lo = prev;
            double hi = t;
            while (hi - lo > 1e-13 * (1.0 + hi)) {
                const double mid = 0.5 * (lo + hi);
                (f(mid) > 0.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = t;
    }
    return std::nullopt;
}

} // namespace

const char* to_string(Prediction p) {
    switch (p) {
        case Prediction::blowup: return "blowup";
        case Prediction::global: return "global";
        case Prediction::none: return "none";
    }
    return "none";
}

bool verdict_well_formed(const CriterionVerdict& v) {
    if (v.t_upper && v.prediction != Prediction::blowup) return false;
    if (v.t_lower && std::isinf(*v.t_lower) && v.prediction != Prediction::global) return false;
    if (!v.applicable && (v.prediction != Prediction::none || v.t_upper || v.t_lower)) return false;
    return true;
}

CriterionVerdict kaplan(const FieldState& state, double gamma, double alpha, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("kaplan: lambda must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("kaplan: alpha must be positive");

    CriterionVerdict v;
    v.name = "kaplan";

    const double sup = sup_norm(state);
    const double tol = 1e-12 * (1.0 + sup);
    double worst_imag = 0.0;
    double lowest_real = 0.0;
    for (const auto& z : state.values) {
        worst_imag = std::max(worst_imag, std::abs(z.imag()));
        lowest_real = std::min(lowest_real, z.real());
    }
    if (worst_imag > tol) {
        v.note = "data has a nontrivial imaginary part";
        return v;
    }
    if (lowest_real < -tol) {
        v.note = "data takes negative values";
        return v;
    }

    const Grid& g = *state.grid;
    const FieldState psi = sample_kaplan_weight(state.grid, lambda);
    std::vector<double> prod(static_cast<size_t>(g.n));
    for (size_t i = 0; i < prod.size(); ++i)
        prod[i] = state.values[i].real() * psi.values[i].real();
    const double f0 = integrate(g, prod);

    const double y0 = std::pow(f0, alpha);
    const double k = lambda * lambda - gamma;
    v.details["f0"] = f0;
    v.details["f0_pow_alpha"] = y0;
    v.details["lambda_sq_minus_gamma"] = k;

    if (!(f0 > 0.0)) {
        v.note = "pairing with the weight vanishes";
        return v;
    }
    const double margin = y0 - k;
    if (!(margin > kHypothesisBand)) {
        v.note = std::abs(margin) <= kHypothesisBand ? "pairing hypothesis on the boundary"
                                                     : "pairing too small for the weight";
        return v;
    }

    v.applicable = true;
    v.prediction = Prediction::blowup;
    // y = f^alpha obeys y' >= alpha y (y - k); the comparison solution
    // leaves every bounded set at the time below (limit 1/(alpha y0) at
    // k = 0, which log1p reproduces stably for small |k|).
    v.t_upper = k == 0.0 ? 1.0 / (alpha * y0) : -std::log1p(-k / y0) / (alpha * k);
    return v;
}

CriterionVerdict smallness_global(const FieldState& state, const EquationParams& p) {
    p.validate();
    CriterionVerdict v;
    v.name = "smallness_global";
    if (p.is_schrodinger_limit()) {
        v.note = "needs theta < pi/2";
        return v;
    }
    const int dim = state.grid->dim;
    const double sup = sup_norm(state);
    const double prefactor = 2.0 * std::pow(p.cos_theta(), -0.5 * dim) * sup;
    const double threshold = -std::pow(prefactor, p.alpha + 1.0) / p.alpha;
    v.details["envelope_prefactor"] = prefactor;
    v.details["envelope_rate"] = p.gamma;
    v.details["gamma_threshold"] = threshold;

    const double margin = threshold - p.gamma;
    if (!(margin > kHypothesisBand)) {
        v.note = std::abs(margin) <= kHypothesisBand ? "gamma on the smallness boundary"
                                                     : "gamma not negative enough";
        return v;
    }
    v.applicable = true;
    v.prediction = Prediction::global;
    v.t_lower = kInf;
    return v;
}

CriterionVerdict blowup_upper_bound(const FieldState& state, const EquationParams& p) {
    p.validate();
    CriterionVerdict v;
    v.name = "blowup_upper_bound";
    if (p.is_schrodinger_limit()) {
        v.note = "needs theta < pi/2";
        return v;
    }
    const double alpha = p.alpha;
    const double ct = p.cos_theta();

    if (p.variant == EquationVariant::GL2) {
        const FunctionalReport rep = report(state, alpha, -1.0);
        const double m = rep.mass;
        const double neg_e = -rep.energy_c;
        v.details["mass"] = m;
        v.details["shift"] = -1.0;
        v.details["energy_shifted"] = rep.energy_c;
        if (!(neg_e > kHypothesisBand)) {
            v.note = std::abs(rep.energy_c) <= kHypothesisBand ? "energy on the boundary"
                                                               : "energy not negative";
            return v;
        }
        v.applicable = true;
        v.prediction = Prediction::blowup;
        v.t_upper =
            std::log1p(2.0 * m / (2.0 * (alpha + 2.0) * neg_e + alpha * m)) / (alpha * ct);
        v.details["cap"] = std::log((alpha + 2.0) / alpha) / (alpha * ct);
        return v;
    }

    const double shift = p.gamma < 0.0 ? p.gamma / ct : 0.0;
    const FunctionalReport rep = report(state, alpha, shift);
    const double m = rep.mass;
    const double neg_e = -rep.energy_c;
    v.details["mass"] = m;
    v.details["shift"] = shift;
    v.details["energy_shifted"] = rep.energy_c;
    if (!(neg_e > kHypothesisBand)) {
        v.note = std::abs(rep.energy_c) <= kHypothesisBand ? "energy on the boundary"
                                                           : "energy not negative";
        return v;
    }

    v.applicable = true;
    v.prediction = Prediction::blowup;
    if (p.gamma > 0.0) {
        v.t_upper = std::log1p(p.gamma * m / ((alpha + 2.0) * neg_e * ct)) / (p.gamma * alpha);
    } else if (p.gamma == 0.0) {
        v.t_upper = m / (alpha * (alpha + 2.0) * neg_e * ct);
    } else {
        const double denom = 2.0 * (alpha + 2.0) * neg_e * ct - p.gamma * alpha * m;
        v.t_upper = std::log1p(-2.0 * p.gamma * m / denom) / (-p.gamma * alpha);
        v.details["cap"] = std::log((alpha + 2.0) / alpha) / (-p.gamma * alpha);
    }
    return v;
}

CriterionVerdict potential_well_bound(const FieldState& state, const EquationParams& p,
                                      const GroundState& q) {
    p.validate();
    if (q.dim != state.grid->dim)
        throw std::invalid_argument("potential_well_bound: ground state dimension mismatch");
    if (std::abs(q.alpha - p.alpha) > 1e-9)
        throw std::invalid_argument("potential_well_bound: ground state alpha mismatch");

    CriterionVerdict v;
    v.name = "potential_well";
    if (p.is_schrodinger_limit()) {
        v.note = "needs theta < pi/2";
        return v;
    }
    const double alpha = p.alpha;
    const double ct = p.cos_theta();
    const int dim = q.dim;

    // The stationary family scales exactly, so any negative-gamma ground
    // state pins down the normalised well depth E_{-1}(Q_{-1}).
    const double scale_exp = 1.0 + 2.0 / alpha - 0.5 * dim;
    const double well_normal = q.well_depth * std::pow(-q.gamma, -scale_exp);
    v.details["well_depth_normalised"] = well_normal;

    double shift = 0.0;
    double threshold = 0.0;
    double prefactor = 0.0;
    if (p.variant == EquationVariant::GL2) {
        shift = -1.0;
        threshold = well_normal;
        prefactor = 1.0 / (alpha * ct);
    } else {
        if (!(p.gamma < 0.0)) {
            v.note = "needs gamma < 0";
            return v;
        }
        shift = p.gamma / ct;
        const double mu = std::sqrt(ct / -p.gamma);
        threshold = std::pow(mu, dim - 2.0 - 4.0 / alpha) * well_normal;
        prefactor = 1.0 / (-p.gamma * alpha);
        v.details["mu"] = mu;
    }

    const FunctionalReport rep = report(state, alpha, shift);
    v.details["shift"] = shift;
    v.details["energy_shifted"] = rep.energy_c;
    v.details["nehari_shifted"] = rep.nehari_c;
    v.details["well_threshold"] = threshold;

    const double margin_e = threshold - rep.energy_c;
    if (!(margin_e > kHypothesisBand)) {
        v.note = std::abs(margin_e) <= kHypothesisBand ? "energy hypothesis on the boundary"
                                                       : "energy not below the well threshold";
        return v;
    }
    const double margin_i = -rep.nehari_c;
    if (!(margin_i > kHypothesisBand)) {
        v.note = std::abs(margin_i) <= kHypothesisBand ? "Nehari hypothesis on the boundary"
                                                       : "Nehari functional not negative";
        return v;
    }

    v.applicable = true;
    v.prediction = Prediction::blowup;
    v.t_upper = prefactor * ((alpha + 4.0) * std::max(rep.energy_c, 0.0) / margin_e +
                             std::log(2.0 * (alpha + 2.0) / alpha));
    return v;
}

double gn_constant(double alpha, int dim) {
    if (dim < 1) throw std::invalid_argument("gn_constant: dim must be at least 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("gn_constant: alpha must be positive");
    if (!(alpha < 4.0 / dim)) throw std::invalid_argument("gn_constant: needs alpha < 4/dim");

    auto grid = make_grid(GridKind::radial, dim, 40.0, 8001);
    std::vector<FieldState> corpus;
    corpus.push_back(sample_gaussian(grid, 1.0, 1.0));
    corpus.push_back(sample_ring(grid, 1.0, 1.0, 0.5));
    corpus.push_back(sample_ring(grid, 1.0, 2.0, 1.0));
    corpus.push_back(sample_ring(grid, 1.0, 4.0, 1.0));
    corpus.push_back(find_ground_state(-1.0, alpha, dim).profile);

    const double p_exp = 1.0 + 2.0 * alpha / (4.0 - dim * alpha);
    double best = 0.0;
    for (const auto& w : corpus) {
        const FunctionalReport rep = report(w, alpha, 0.0);
        // Amplitude s and dilation lam act on the three norms in closed
        // form, so the sweep is plain arithmetic on the base functionals.
        for (int i = 0; i <= 180; ++i) {
            const double s = std::pow(10.0, -3.0 + i / 30.0);
            const double s_pot = std::pow(s, alpha + 2.0) * rep.pot;
            const double s_grad = s * s * rep.grad_sq;
            const double s_mass = s * s * rep.mass;
            for (int j = 0; j <= 80; ++j) {
                const double lam = std::pow(10.0, -1.0 + j / 40.0);
                const double num =
                    std::pow(lam, dim) * s_pot - std::pow(lam, dim - 2.0) * s_grad;
                if (num <= 0.0) continue;
                const double den = std::pow(std::pow(lam, dim) * s_mass, p_exp);
                best = std::max(best, num / den);
            }
        }
    }
    return 1.05 * std::max(best, 1e-8);
}

CriterionVerdict global_lower_bound(const FieldState& state, const EquationParams& p, double A) {
    p.validate();
    const int dim = state.grid->dim;
    const double alpha = p.alpha;
    if (!(alpha < 4.0 / dim))
        throw std::invalid_argument("global_lower_bound: needs alpha < 4/dim");
    if (!(A > 0.0)) throw std::invalid_argument("global_lower_bound: A must be positive");

    CriterionVerdict v;
    v.name = "global_lower_bound";
    v.details["a_constant"] = A;
    const double m = mass_of(state);
    v.details["mass"] = m;
    if (p.is_schrodinger_limit()) {
        v.note = "needs theta < pi/2";
        return v;
    }
    v.applicable = true;
    if (m <= 0.0) {
        v.prediction = Prediction::global;
        v.t_lower = kInf;
        v.note = "zero data";
        return v;
    }

    const double ct = p.cos_theta();
    const double B = A * std::pow(m, 2.0 * alpha / (4.0 - dim * alpha));
    const double pref = (4.0 - dim * alpha) / (4.0 * alpha);
    v.details["defect_scale"] = B;

    if (p.variant == EquationVariant::GL2) {
        if (B <= 1.0) {
            v.prediction = Prediction::global;
            v.t_lower = kInf;
        } else {
            v.t_lower = -pref / ct * std::log1p(-1.0 / B);
        }
        return v;
    }

    if (p.gamma > 0.0) {
        v.t_lower = pref / p.gamma * std::log1p(p.gamma / (B * ct));
    } else if (p.gamma == 0.0) {
        v.t_lower = pref / (B * ct);
    } else {
        v.details["global_cos_threshold"] = -p.gamma / B;
        if (ct <= -p.gamma / B) {
            v.prediction = Prediction::global;
            v.t_lower = kInf;
        } else {
            v.t_lower = pref / p.gamma * std::log1p(p.gamma / (B * ct));
        }
    }
    return v;
}

CriterionVerdict nls_variance_criteria(const FieldState& state, double gamma, double alpha) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("nls_variance_criteria: alpha must be positive");
    const int dim = state.grid->dim;
    const FunctionalReport rep = report(state, alpha, 0.0);
    if (!std::isfinite(rep.variance) || !std::isfinite(rep.momentum) ||
        !std::isfinite(rep.energy))
        throw std::invalid_argument("nls_variance_criteria: variance is not finite on this grid");

    CriterionVerdict v;
    v.name = "nls_variance";
    v.details["variance"] = rep.variance;
    v.details["momentum"] = rep.momentum;
    v.details["energy"] = rep.energy;

    const double crit = 4.0 / dim;
    const double upper = dim > 2 ? 4.0 / (dim - 2.0) : kInf;

    if (gamma >= 0.0) {
        if (alpha < crit || alpha >= upper) {
            v.note = "alpha outside [4/N, 4/(N-2))";
            return v;
        }
        if (!(-rep.energy > kHypothesisBand)) {
            v.note = std::abs(rep.energy) <= kHypothesisBand ? "energy on the boundary"
                                                             : "energy not negative";
            return v;
        }
        const double a = alpha * gamma;
        const auto envelope = [&](double t) {
            const double dd = a == 0.0 ? 0.5 * t * t : (std::expm1(a * t) - a * t) / (a * a);
            return rep.variance - 4.0 * t * rep.momentum + 16.0 * rep.energy * dd;
        };
        v.applicable = true;
        v.prediction = Prediction::blowup;
        if (const auto root = first_root_on(envelope, 1000.0))
            v.t_upper = root;
        else
            v.note = "variance envelope has no root in [0, 1000]";
        return v;
    }

    if (!(alpha > crit) || alpha >= upper) {
        v.note = "alpha outside (4/N, 4/(N-2))";
        return v;
    }
    const double ratio = (dim * alpha - 4.0) / (gamma * alpha);
    const double condition = rep.variance + ratio * rep.momentum + ratio * ratio * rep.energy;
    const double eta = -4.0 * gamma * alpha / (dim * alpha - 4.0);
    const double rate = -2.0 * gamma * (4.0 - (dim - 2.0) * alpha) / (dim * alpha - 4.0);
    v.details["condition_value"] = condition;
    v.details["eta"] = eta;
    v.details["envelope_rate"] = rate;
    if (!(-condition > kHypothesisBand)) {
        v.note = std::abs(condition) <= kHypothesisBand ? "variance condition on the boundary"
                                                        : "variance condition not satisfied";
        return v;
    }
    const auto envelope = [&](double t) {
        const double e1 = -std::expm1(-eta * t);
        const double e2 = 1.0 - (1.0 - eta * t) * std::exp(-eta * t);
        return rep.variance - 4.0 / eta * e1 * rep.momentum +
               16.0 / (eta * eta) * e2 * rep.energy;
    };
    v.applicable = true;
    v.prediction = Prediction::blowup;
    if (const auto root = first_root_on(envelope, 1000.0))
        v.t_upper = root;
    else
        v.note = "variance envelope has no root in [0, 1000]";
    return v;
}

double mass_growth_factor(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("mass_growth_factor: alpha must be positive");
    return 1.0 / (1.0 - std::sqrt((alpha + 4.0) / (2.0 * alpha + 4.0)));
}

std::optional<double> blowup_bound_from_mass_growth(std::span<const FunctionalReport> reports,
                                                    double alpha, double gamma) {
    if (reports.empty()) return std::nullopt;
    const double factor = mass_growth_factor(alpha);
    const double t0 = reports.front().time;
    const double m0 = reports.front().mass;
    if (!(m0 > 0.0)) return std::nullopt;
    for (const auto& r : reports) {
        const double tau = r.time - t0;
        if (std::exp(-2.0 * gamma * tau) * r.mass >= factor * m0)
            return (alpha + 4.0) / alpha * tau;
    }
    return std::nullopt;
}

} // namespace glab
