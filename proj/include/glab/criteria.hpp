#pragma once

#include "glab/equation.hpp"
#include "glab/functionals.hpp"
#include "glab/grid.hpp"
#include "glab/groundstate.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>

namespace glab {

/// What a criterion concludes about the run it certifies.
enum class Prediction { blowup, global, none };

const char* to_string(Prediction p);

/// Strict inequalities in criterion hypotheses are evaluated on discrete
/// functionals, so a margin this close to zero counts as "on the boundary"
/// and the criterion declares itself inapplicable rather than guessing.
inline constexpr double kHypothesisBand = 1e-10;

/// Machine-checkable certificate produced by one criterion on one state.
///
/// `applicable` records whether the hypotheses hold on the discrete
/// functionals (subject to kHypothesisBand). `details` carries the numeric
/// evidence the verdict rests on (functional values, thresholds, constants),
/// `note` a human-readable reason when the verdict is inapplicable or a
/// bound could not be extracted. A finite t_lower is a plain existence-time
/// lower bound and implies no prediction; an infinite one certifies a
/// global solution.
struct CriterionVerdict {
    std::string name;
    bool applicable = false;
    Prediction prediction = Prediction::none;
    std::optional<double> t_upper;
    std::optional<double> t_lower;
    std::map<std::string, double> details;
    std::string note;
};

/// Structural invariants every verdict satisfies: t_upper forces the blowup
/// prediction, an infinite t_lower forces the global prediction, and an
/// inapplicable verdict predicts nothing and carries no bounds.
bool verdict_well_formed(const CriterionVerdict& v);

/// First-moment comparison test for the real heat flow (theta = 0).
///
/// Pairs the state against the normalised weight psi_lambda (see
/// sample_kaplan_weight) to get f(0) = int u0 psi_lambda, then integrates
/// the comparison ODE f' = (gamma - lambda^2 + f^alpha) f in closed form.
/// Applicable, and then a proof of blowup with an explicit t_upper, iff
/// f(0)^alpha > lambda^2 - gamma. Data that is not real and nonnegative
/// yields an inapplicable verdict with a reason. Throws
/// std::invalid_argument for lambda <= 0 or alpha <= 0.
CriterionVerdict kaplan(const FieldState& state, double gamma, double alpha, double lambda);

/// Global existence by strongly negative gamma: the solution stays below
/// the envelope 2 cos(theta)^{-N/2} e^{gamma t} ||u0||_inf whenever
/// gamma < -(1/alpha) [2 cos(theta)^{-N/2} ||u0||_inf]^{alpha+1}. The
/// verdict is global (t_lower infinite) when the condition holds and
/// inapplicable otherwise; theta = pi/2 is always inapplicable.
CriterionVerdict smallness_global(const FieldState& state, const EquationParams& p);

/// Negative-energy blowup certificate with an explicit upper bound on the
/// maximal existence time.
///
/// GL: the hypothesis is E(u0) < 0 for gamma >= 0 and E_{gamma/cos theta}
/// (u0) < 0 for gamma < 0, with
///   gamma > 0 : t <= (1/(gamma alpha)) log(1 + gamma m /
///               ((alpha+2)(-E) cos theta))
///   gamma = 0 : t <= m / (alpha (alpha+2)(-E) cos theta)
///   gamma < 0 : t <= (1/(-gamma alpha)) log(1 + (-2 gamma m) /
///               (2(alpha+2)(-E_c) cos theta - gamma alpha m))
/// where m is the squared L2 norm. For gamma < 0 the data-independent cap
/// (1/(-gamma alpha)) log((alpha+2)/alpha) is recorded in details["cap"];
/// the branch formula always lies below it.
///
/// GL2: hypothesis E_{-1}(v0) < 0 and
///   t <= (1/(alpha cos theta)) log(1 + 2 m / (2(alpha+2)(-E_{-1}) +
///        alpha m)),
/// cap (1/(alpha cos theta)) log((alpha+2)/alpha). theta = pi/2 is
/// inapplicable in both variants.
CriterionVerdict blowup_upper_bound(const FieldState& state, const EquationParams& p);

/// Potential-well blowup certificate against a stationary profile Q.
///
/// GL (needs gamma < 0): with c = gamma/cos theta and
/// mu = sqrt(cos theta / -gamma), applicable iff
///   E_c(u0) < mu^{N-2-4/alpha} E_{-1}(Q_{-1})  and  I_c(u0) < 0,
/// and then
///   t <= (1/(-gamma alpha)) [ (alpha+4) [E_c]^+ / (threshold - E_c)
///         + log(2(alpha+2)/alpha) ].
/// GL2: the same with c = -1, threshold E_{-1}(Q_{-1}) and prefactor
/// 1/(alpha cos theta). Q may be the ground state for any negative gamma;
/// its well depth is converted to E_{-1}(Q_{-1}) through the exact scaling
/// of the stationary family. Throws std::invalid_argument when Q does not
/// match the state's dimension or the equation's alpha.
CriterionVerdict potential_well_bound(const FieldState& state, const EquationParams& p,
                                      const GroundState& q);

/// Constant A making ||w||_{alpha+2}^{alpha+2} <= ||grad w||_2^2 +
/// A ||w||_2^{2 + 4 alpha/(4 - N alpha)} hold on the test corpus
/// (Gaussians, rings and the stationary profile of -Lap w + w = |w|^alpha w,
/// each swept over amplitude and dilation in closed form). Returns the
/// corpus maximum of the defect ratio, clamped below at a small positive
/// floor and multiplied by a 1.05 safety factor. The stationary family
/// contains the optimiser of the underlying interpolation inequality, so
/// the result is near sharp. Requires alpha < 4/dim (throws otherwise).
double gn_constant(double alpha, int dim);

/// Existence-time lower bound from the subcritical a-priori estimate, with
/// A a constant from gn_constant. Writing B = A ||u0||_2^{4 alpha/(4-N alpha)}:
///
/// GL:  gamma > 0 : t >= ((4-N alpha)/(4 alpha gamma))
///                  log(1 + gamma/(B cos theta))
///      gamma = 0 : t >= (4-N alpha)/(4 alpha B cos theta)
///      gamma < 0 : global when cos theta <= -gamma/B, otherwise the same
///                  log formula (positive because both factors are negative)
/// GL2: global when B <= 1, otherwise
///      t >= -((4-N alpha)/(4 alpha cos theta)) log(1 - 1/B).
///
/// Zero data is global in every branch. A finite t_lower carries no
/// blowup/global prediction. Requires alpha < 4/dim and A > 0 (throws
/// otherwise); theta = pi/2 is inapplicable.
CriterionVerdict global_lower_bound(const FieldState& state, const EquationParams& p, double A);

/// Variance (virial) blowup criteria for the Schrodinger end of the family
/// (the hypotheses only involve functionals of the data, so theta is not a
/// parameter; the conclusion is about theta = pi/2 dynamics).
///
/// gamma >= 0 (needs 4/N <= alpha, and alpha < 4/(N-2) when N > 2):
/// applicable iff E(u0) < 0, and t_upper is the first positive root of
///   g(t) = V - 4 M t + 16 E D(t),  D(t) = (e^{a t} - 1 - a t)/a^2,
/// a = alpha gamma (D = t^2/2 at gamma = 0).
///
/// gamma < 0 (needs alpha > 4/N strictly): applicable iff
///   V + ((N alpha - 4)/(gamma alpha)) M
///     + ((N alpha - 4)/(gamma alpha))^2 E < 0,
/// and t_upper is the first root of
///   R(t) = V - (4/eta)(1 - e^{-eta t}) M
///          + (16/eta^2)(1 - (1 - eta t) e^{-eta t}) E,
/// eta = -4 gamma alpha/(N alpha - 4). details records eta and the
/// envelope rate b = -2 gamma (4 - (N-2) alpha)/(N alpha - 4): the bound
/// certifies e^{-b t} V(t) <= R(t) until blowup.
///
/// Roots are bracketed by a forward sweep over [0, 1000] and bisected; if
/// the envelope has no root there the verdict stays applicable with no
/// t_upper and a diagnostic note. Throws std::invalid_argument when the
/// data's variance or energy is not finite.
CriterionVerdict nls_variance_criteria(const FieldState& state, double gamma, double alpha);

/// Factor K(alpha) = [1 - sqrt((alpha+4)/(2 alpha+4))]^{-1} > 1 in the
/// mass-concentration bound: once the gauge-removed mass e^{-2 gamma t}
/// ||u(t)||_2^2 reaches K times its initial value at time tau, the maximal
/// existence time is at most ((alpha+4)/alpha) tau.
double mass_growth_factor(double alpha);

/// Applies the mass-concentration bound to a recorded report series: finds
/// the first report whose gauge-removed mass reaches K(alpha) times the
/// initial one and returns ((alpha+4)/alpha) times that report's time
/// (relative to the first report). Empty when the series never gets there.
std::optional<double> blowup_bound_from_mass_growth(std::span<const FunctionalReport> reports,
                                                    double alpha, double gamma);

} // namespace glab
