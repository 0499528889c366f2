#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace glab {

/// Time-dependent coefficient f(t) in front of the focusing term.
/// Frames obtained by factoring out exponential growth carry
/// f(t) = exp(rate * t); anything else goes through `custom`.
struct Forcing {
    enum class Kind { one, exponential, custom };

    Kind kind = Kind::one;
    double rate = 0.0;
    std::function<double(double)> fn;

    static Forcing one() { return {}; }
    static Forcing exponential(double rate) {
        Forcing f;
        f.kind = Kind::exponential;
        f.rate = rate;
        return f;
    }
    static Forcing custom(std::function<double(double)> fn) {
        Forcing f;
        f.kind = Kind::custom;
        f.fn = std::move(fn);
        return f;
    }

    double operator()(double t) const {
        switch (kind) {
            case Kind::one: return 1.0;
            case Kind::exponential: return std::exp(rate * t);
            case Kind::custom: return fn(t);
        }
        return 1.0;
    }

    /// f'(t). Custom forcings fall back to a central difference.
    double derivative(double t) const {
        switch (kind) {
            case Kind::one: return 0.0;
            case Kind::exponential: return rate * std::exp(rate * t);
            case Kind::custom: {
                const double h = 1e-6 * (1.0 + std::abs(t));
                return (fn(t + h) - fn(t - h)) / (2.0 * h);
            }
        }
        return 0.0;
    }

    bool is_one() const { return kind == Kind::one; }
};

/// Which zeroth-order linear term the equation carries.
///   GL  : u_t = e^{i theta} (Lap u + f(t) |u|^alpha u) + gamma u
///   GL2 : v_t = e^{i theta} (Lap v + f(t) |v|^alpha v - v)
/// The NLS limit is GL at theta = pi/2.
enum class EquationVariant { GL, GL2 };

struct EquationParams {
    double alpha = 2.0;
    double gamma = 0.0;
    double theta = 0.0; // in [0, pi/2]
    EquationVariant variant = EquationVariant::GL;
    Forcing forcing = Forcing::one();

    double cos_theta() const { return std::cos(theta); }
    double sin_theta() const { return std::sin(theta); }
    bool is_schrodinger_limit() const { return std::abs(cos_theta()) < 1e-12; }

    void validate() const {
        if (!(alpha > 0.0)) throw std::invalid_argument("EquationParams: alpha must be positive");
        if (theta < 0.0 || theta > std::acos(-1.0) / 2.0 + 1e-12)
            throw std::invalid_argument("EquationParams: theta must lie in [0, pi/2]");
        if (variant == EquationVariant::GL2 && gamma != 0.0)
            throw std::invalid_argument("EquationParams: GL2 frame has no gamma term");
    }
};

} // namespace glab
