#include "glab/cutoff.hpp"

#include <cmath>
#include <stdexcept>

namespace glab {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr double kGx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                           -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                           0.7966664774136267,  0.9602898564975363};
constexpr double kGw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                           0.2223810344533745, 0.1012285362903763};

// (s - 1)(2 - s), the gap function of the bump support.
inline double gap(double s) { return (s - 1.0) * (2.0 - s); }

} // namespace

double CutoffFamily::raw_bump(double s) const {
    const double g = gap(s);
    // exp(-1/g) underflows long before g hits zero; cutting early avoids
    // 0 * inf at the support edges.
    if (g < 2e-3) return 0.0;
    return std::exp(-1.0 / g);
}

double CutoffFamily::partial_panel(double a, double b, bool moment) const {
    double acc = 0.0;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int q = 0; q < 8; ++q) {
        const double s = mid + half * kGx[q];
        acc += kGw[q] * raw_bump(s) * (moment ? s : 1.0);
    }
    return acc * half * norm_;
}

CutoffFamily::CutoffFamily(double epsilon, int dim) : eps_(epsilon), dim_(dim) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("CutoffFamily: epsilon must be positive");
    if (dim < 1) throw std::invalid_argument("CutoffFamily: dim must be >= 1");

    panels_ = 512;
    panel_w_ = 1.0 / panels_;
    cum_h_.assign(static_cast<size_t>(panels_) + 1, 0.0);
    cum_sh_.assign(static_cast<size_t>(panels_) + 1, 0.0);

    norm_ = 1.0; // raw pass first
    for (int p = 0; p < panels_; ++p) {
        const double a = 1.0 + p * panel_w_, b = a + panel_w_;
        cum_h_[static_cast<size_t>(p) + 1] = cum_h_[static_cast<size_t>(p)] + partial_panel(a, b, false);
        cum_sh_[static_cast<size_t>(p) + 1] = cum_sh_[static_cast<size_t>(p)] + partial_panel(a, b, true);
    }
    norm_ = 1.0 / cum_h_.back();
    for (auto& v : cum_h_) v *= norm_;
    for (auto& v : cum_sh_) v *= norm_;
    m_plateau_ = cum_sh_.back();
}

CutoffFamily build_cutoff(double epsilon, int dim) { return CutoffFamily(epsilon, dim); }

double CutoffFamily::h(double s) const { return norm_ * raw_bump(s); }

double CutoffFamily::h_prime(double s) const {
    const double g = gap(s);
    if (g < 2e-3) return 0.0;
    const double gp = 3.0 - 2.0 * s;
    return h(s) * gp / (g * g);
}

double CutoffFamily::h_second(double s) const {
    const double g = gap(s);
    if (g < 2e-3) return 0.0;
    const double gp = 3.0 - 2.0 * s;
    const double q = gp / (g * g);
    // (h * q)' = h * (q^2 + q') with q' = g''/g^2 - 2 g'^2/g^3, g'' = -2
    return h(s) * (q * q - 2.0 / (g * g) - 2.0 * gp * gp / (g * g * g));
}

double CutoffFamily::h_cumulative(double t) const {
    if (t <= 1.0) return 0.0;
    if (t >= 2.0) return 1.0;
    const int p = std::min(panels_ - 1, static_cast<int>((t - 1.0) / panel_w_));
    const double a = 1.0 + p * panel_w_;
    return cum_h_[static_cast<size_t>(p)] + partial_panel(a, t, false);
}

double CutoffFamily::h_first_moment(double t) const {
    if (t <= 1.0) return 0.0;
    if (t >= 2.0) return m_plateau_;
    const int p = std::min(panels_ - 1, static_cast<int>((t - 1.0) / panel_w_));
    const double a = 1.0 + p * panel_w_;
    return cum_sh_[static_cast<size_t>(p)] + partial_panel(a, t, true);
}

double CutoffFamily::zeta(double t) const {
    if (t <= 1.0) return t;
    if (t >= 2.0) return m_plateau_;
    // t - int_0^t (t - s) h(s) ds = t (1 - H(t)) + int_0^t s h(s) ds
    return t * (1.0 - h_cumulative(t)) + h_first_moment(t);
}

double CutoffFamily::zeta_p(double t) const { return 1.0 - h_cumulative(t); }
double CutoffFamily::zeta_pp(double t) const { return -h(t); }
double CutoffFamily::zeta_3(double t) const { return -h_prime(t); }
double CutoffFamily::zeta_4(double t) const { return -h_second(t); }

double CutoffFamily::xi(double t) const {
    const double v = 2.0 * h_cumulative(t) + 4.0 * t * h(t);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

double CutoffFamily::gamma_eps(double r) const { return xi(eps_ * eps_ * r * r); }

double CutoffFamily::psi(double r) const {
    const double t = eps_ * eps_ * r * r;
    return zeta(t) / (eps_ * eps_);
}

double CutoffFamily::psi_r(double r) const {
    const double t = eps_ * eps_ * r * r;
    return 2.0 * r * zeta_p(t);
}

double CutoffFamily::psi_rr(double r) const {
    const double t = eps_ * eps_ * r * r;
    return 2.0 * zeta_p(t) + 4.0 * t * zeta_pp(t);
}

double CutoffFamily::lap_psi(double r) const {
    const double t = eps_ * eps_ * r * r;
    return 2.0 * dim_ * zeta_p(t) + 4.0 * t * zeta_pp(t);
}

double CutoffFamily::bilap_psi(double r) const {
    const double t = eps_ * eps_ * r * r;
    const double nd = static_cast<double>(dim_);
    return eps_ * eps_ *
           (4.0 * nd * (nd + 2.0) * zeta_pp(t) + 16.0 * (nd + 2.0) * t * zeta_3(t) +
            16.0 * t * t * zeta_4(t));
}

double kappa(double mu_tilde, double epsilon, double alpha, int dim, double Const) {
    if (!(alpha > 0.0) || alpha > 4.0) throw std::domain_error("kappa: alpha must lie in (0, 4]");
    if (!(epsilon > 0.0) || epsilon > 1.0) throw std::domain_error("kappa: epsilon must lie in (0, 1]");
    if (!(mu_tilde > 0.0) || !(Const > 0.0)) throw std::domain_error("kappa: mu_tilde, Const must be positive");
    const double nd = static_cast<double>(dim);
    const double lead = Const * mu_tilde * std::pow(epsilon, nd * alpha / 2.0);
    if (alpha == 4.0) return lead + Const * epsilon * epsilon;
    const double gate = Const * mu_tilde * std::pow(epsilon, 2.0 * (nd - 1.0));
    if (!(gate < 1.0))
        throw std::domain_error("kappa: Const*mu*eps^{2(dim-1)} must stay below 1 for alpha < 4");
    return lead + Const * mu_tilde * std::pow(gate, alpha / (4.0 - alpha)) +
           Const * epsilon * epsilon;
}

double kappa_decay_exponent(double alpha, double lambda, int dim) {
    if (dim < 2) throw std::domain_error("kappa_decay_exponent: needs dim >= 2");
    const double lo = 1.0 / (2.0 * (dim - 1));
    if (!(lambda > lo) || !(lambda < 0.5))
        throw std::domain_error("kappa_decay_exponent: lambda outside (1/(2(dim-1)), 1/2)");
    const double first = lambda * dim / 2.0;
    if (alpha == 4.0) return alpha * first;
    const double second = (2.0 * (dim - 1) * lambda - 1.0) / (4.0 - alpha);
    return alpha * std::min(first, second);
}

} // namespace glab
