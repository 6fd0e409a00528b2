#pragma once

#include <string>
#include <variant>

namespace mmq {

// Fill-rate models: the fraction of incoming flow captured when quoting a
// distance delta from the mid-price.
//
// Linear keeps the closed-form algebra of the quadratic-value solvers and is
// deliberately not clamped at zero: values beyond zeta/gamma are accepted as
// modelling error so that the affine solutions stay exact.
struct LinearIntensity {
    double zeta;   // fill rate at delta = 0
    double gamma;  // decay per unit of quote distance
};

// exp(-gamma*delta): positive, strictly decreasing, and inside the class of
// intensities for which the quote optimisation below is well posed.
struct ExponentialIntensity {
    double gamma;
};

using IntensityModel = std::variant<LinearIntensity, ExponentialIntensity>;

// Hard clamp applied to optimal quotes, [-xi, xi].
struct Truncation {
    double xi;
};

void validate_model(const IntensityModel& m);  // positive parameters

double lambda_value(const IntensityModel& m, double delta);

struct IntensityClassReport {
    bool decreasing = false;       // Lambda' < 0 everywhere
    bool curvature_ok = false;     // sup Lambda*Lambda''/Lambda'^2 < 2
    bool vanishes_at_inf = false;  // Lambda(x) -> 0 as x -> +inf
    bool special_case = false;     // linear model: outside the class, handled
                                   // by the dedicated quadratic machinery
    double curvature_ratio = 0.0;  // the sup above (exact for built-ins)
    std::string note;

    bool in_class() const { return decreasing && curvature_ok && vanishes_at_inf; }
};

IntensityClassReport validate_intensity_class(const IntensityModel& m);

// w_value(p) = sup_delta Lambda(delta) * (delta - p), the optimised spread
// revenue per unit of flow when the marginal value of inventory is p.
// Closed forms: exponential exp(-1-gamma*p)/gamma, linear gamma/4*(zeta/gamma-p)^2.
double w_value(const IntensityModel& m, double p);

// The unique maximiser of the expression above; strictly increasing in p.
// Exponential: 1/gamma + p.  Linear: zeta/(2 gamma) + p/2.
double delta_star(const IntensityModel& m, double p);

double clamp_quote(double delta, const Truncation& trunc);
double delta_star_truncated(const IntensityModel& m, double p, const Truncation& trunc);

// A truncation wide enough that the clamp stays inactive for adjoint values up
// to |y| <= y_bound (ten times the largest quote the feedback rule can emit).
Truncation default_truncation(const IntensityModel& m, double y_bound);

// Net inventory drift when the adjoint value is y: mu(y) =
// -a*Lambda_a(delta_a*(y)) + b*Lambda_b(delta_b*(-y)); nondecreasing in y.
double forward_drift(const IntensityModel& model_a, const IntensityModel& model_b,
                     double a, double b, double y, const Truncation& trunc);

}  // namespace mmq
