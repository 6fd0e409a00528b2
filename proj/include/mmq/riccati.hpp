#pragma once

#include <utility>
#include <vector>

#include "mmq/flow.hpp"

namespace mmq {

// Backward solution of dP/dt = -mu P^2 + 2 phi, P(T) = -nu.
struct RiccatiSolution {
    std::vector<double> times;
    std::vector<double> P;
};

// Coefficients of the affine adjoint representation Y = P*Q + H.
struct AffineField {
    std::vector<double> times;
    std::vector<double> P;
    std::vector<double> H;
};

// One controlled run: inventory, adjoint, quotes, and the realized objective.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> Q;
    std::vector<double> Y;
    std::vector<double> delta_a;
    std::vector<double> delta_b;
    double objective = 0.0;
};

// Quadratic value expansion in inventory: H(t,q) = h0 + h1*q + h2*q^2.
struct HSystem {
    std::vector<double> times;
    std::vector<double> h2;
    std::vector<double> h1;
    std::vector<double> h0;
};

// Backward RK4 for the scalar Riccati equation above.  mu and phi live on the
// same grid as `times` and must be nonnegative; nu >= 0.  The solution stays
// in [-(nu + 2*max(phi)*T), 0].
RiccatiSolution solve_riccati(const std::vector<double>& times,
                              const std::vector<double>& mu,
                              const std::vector<double>& phi,
                              double nu_terminal);

// Reference solution for phi == 0: P_t = -1 / (1/nu + int_t^T mu ds).
// nu == 0 collapses to P == 0.
std::vector<double> riccati_closed_form_zero_phi(const std::vector<double>& times,
                                                 const std::vector<double>& mu,
                                                 double nu_terminal);

// Value-function coefficients for linear intensity and deterministic flows:
//   h2' = -gamma(a+b) h2^2 + phi,            h2(T) = -A
//   h1' = -zeta(b-a) h2 - gamma(a+b) h2 h1,  h1(T) = 0
//   h0' = -zeta(b-a) h1 - (gamma b/4)(zeta/gamma - h1)^2
//                       - (gamma a/4)(zeta/gamma + h1)^2,  h0(T) = 0
// h2 is delegated to solve_riccati; h1 and h0 follow by backward RK4.
HSystem solve_h_system(const FlowPath& flow, const PenaltyPath& penalty,
                       double zeta, double gamma);

// Linear-intensity optimal control via the affine adjoint ansatz.  Returns
// the (P, H) coefficient field and the optimal trajectory from q0, with
// quotes delta_a = zeta/(2 gamma) + Y/2, delta_b = zeta/(2 gamma) - Y/2 and
// the realized objective value.
std::pair<AffineField, Trajectory> solve_affine_fbsde(const FlowPath& flow,
                                                      const PenaltyPath& penalty,
                                                      double zeta, double gamma,
                                                      double q0);

// Terminal ask quote as a function of executed one-sided volume x for the
// linear intensity model: f(x) = zeta/(2 gamma) + (zeta x - 2 q0)/(2 (1/A + gamma x)).
double impact_linear_closed_form(double zeta, double gamma, double A, double q0, double x);

struct ImpactRoot {
    double Q_T = 0.0;
    double delta_a_T = 0.0;
};

// Terminal inventory and ask quote for the exponential model with one-sided
// flow of total volume x: solves y + x*exp(2 gamma A y - 1) - q0 = 0 by
// bisection (the left side is strictly increasing in y), then
// delta_a_T = 1/gamma - 2 A Q_T.
ImpactRoot impact_exponential_root(double gamma, double A, double q0, double x);

}  // namespace mmq
