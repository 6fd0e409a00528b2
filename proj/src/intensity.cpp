#include "mmq/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmq {

void validate_model(const IntensityModel& m) {
    std::visit(
        [](const auto& mod) {
            using T = std::decay_t<decltype(mod)>;
            if constexpr (std::is_same_v<T, LinearIntensity>) {
                if (!(mod.zeta > 0.0)) throw std::invalid_argument("intensity: zeta must be positive");
                if (!(mod.gamma > 0.0)) throw std::invalid_argument("intensity: gamma must be positive");
            } else {
                if (!(mod.gamma > 0.0)) throw std::invalid_argument("intensity: gamma must be positive");
            }
        },
        m);
}

double lambda_value(const IntensityModel& m, double delta) {
    return std::visit(
        [delta](const auto& mod) {
            using T = std::decay_t<decltype(mod)>;
            if constexpr (std::is_same_v<T, LinearIntensity>)
                return mod.zeta - mod.gamma * delta;  // may go negative by design
            else
                return std::exp(-mod.gamma * delta);
        },
        m);
}

IntensityClassReport validate_intensity_class(const IntensityModel& m) {
    IntensityClassReport r;
    std::visit(
        [&r](const auto& mod) {
            using T = std::decay_t<decltype(mod)>;
            if constexpr (std::is_same_v<T, LinearIntensity>) {
                (void)mod;
                // Lambda'' = 0 so the curvature ratio vanishes, but Lambda does
                // not decay to zero at +inf (it crosses into negative values).
                r.decreasing = true;
                r.curvature_ok = true;
                r.vanishes_at_inf = false;
                r.special_case = true;
                r.curvature_ratio = 0.0;
                r.note = "linear fill rate: outside the decreasing-to-zero class; "
                         "served by the quadratic-value solvers";
            } else {
                (void)mod;
                // For exp(-g x): Lambda*Lambda''/Lambda'^2 == 1 identically.
                r.decreasing = true;
                r.curvature_ok = true;
                r.vanishes_at_inf = true;
                r.special_case = false;
                r.curvature_ratio = 1.0;
                r.note = "exponential fill rate: in class, curvature ratio 1 < 2";
            }
        },
        m);
    return r;
}

double w_value(const IntensityModel& m, double p) {
    return std::visit(
        [p](const auto& mod) {
            using T = std::decay_t<decltype(mod)>;
            if constexpr (std::is_same_v<T, LinearIntensity>) {
                const double d = mod.zeta / mod.gamma - p;
                return 0.25 * mod.gamma * d * d;
            } else {
                return std::exp(-1.0 - mod.gamma * p) / mod.gamma;
            }
        },
        m);
}

double delta_star(const IntensityModel& m, double p) {
    return std::visit(
        [p](const auto& mod) {
            using T = std::decay_t<decltype(mod)>;
            if constexpr (std::is_same_v<T, LinearIntensity>)
                return 0.5 * mod.zeta / mod.gamma + 0.5 * p;
            else
                return 1.0 / mod.gamma + p;
        },
        m);
}

double clamp_quote(double delta, const Truncation& trunc) {
    if (!(trunc.xi > 0.0)) throw std::invalid_argument("truncation: xi must be positive");
    return std::clamp(delta, -trunc.xi, trunc.xi);
}

double delta_star_truncated(const IntensityModel& m, double p, const Truncation& trunc) {
    return clamp_quote(delta_star(m, p), trunc);
}

Truncation default_truncation(const IntensityModel& m, double y_bound) {
    if (!(y_bound >= 0.0)) throw std::invalid_argument("default_truncation: y_bound must be >= 0");
    const double base = std::abs(delta_star(m, 0.0));
    return Truncation{10.0 * (base + y_bound)};
}

double forward_drift(const IntensityModel& model_a, const IntensityModel& model_b,
                     double a, double b, double y, const Truncation& trunc) {
    if (a < 0.0 || b < 0.0) throw std::invalid_argument("forward_drift: flows must be nonnegative");
    const double da = delta_star_truncated(model_a, y, trunc);
    const double db = delta_star_truncated(model_b, -y, trunc);
    return -a * lambda_value(model_a, da) + b * lambda_value(model_b, db);
}

}  // namespace mmq
