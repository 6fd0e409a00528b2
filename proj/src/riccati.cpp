#include "mmq/riccati.hpp"

#include <cmath>
#include <stdexcept>

#include "mmq/common.hpp"

namespace mmq {

namespace {

void check_riccati_inputs(const std::vector<double>& times, const std::vector<double>& mu,
                          const std::vector<double>& phi, double nu) {
    const std::size_t n = times.size();
    if (n < 2) throw std::invalid_argument("solve_riccati: grid needs at least two points");
    if (mu.size() != n || phi.size() != n)
        throw std::invalid_argument("solve_riccati: coefficient grids must match the time grid");
    for (std::size_t i = 1; i < n; ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("solve_riccati: time grid must be strictly increasing");
    for (std::size_t i = 0; i < n; ++i)
        if (!(mu[i] >= 0.0) || !(phi[i] >= 0.0))
            throw std::invalid_argument("solve_riccati: mu and phi must be nonnegative");
    if (!(nu >= 0.0)) throw std::invalid_argument("solve_riccati: terminal weight must be >= 0");
}

}  // namespace

RiccatiSolution solve_riccati(const std::vector<double>& times, const std::vector<double>& mu,
                              const std::vector<double>& phi, double nu_terminal) {
    check_riccati_inputs(times, mu, phi, nu_terminal);
    auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dydt) {
        const double m = interp_linear(times, mu, t);
        const double p = interp_linear(times, phi, t);
        dydt[0] = -m * y[0] * y[0] + 2.0 * p;
    };
    const auto states = rk4_backward_grid(times, {-nu_terminal}, rhs);
    RiccatiSolution sol;
    sol.times = times;
    sol.P.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) sol.P[i] = states[i][0];
    return sol;
}

std::vector<double> riccati_closed_form_zero_phi(const std::vector<double>& times,
                                                 const std::vector<double>& mu,
                                                 double nu_terminal) {
    const std::size_t n = times.size();
    std::vector<double> out(n, 0.0);
    if (nu_terminal == 0.0) return out;  // zero is a fixed point; 1/nu undefined
    std::vector<double> tail(n, 0.0);    // int_t^T mu ds, trapezoid
    for (std::size_t i = n - 1; i > 0; --i)
        tail[i - 1] = tail[i] + 0.5 * (times[i] - times[i - 1]) * (mu[i] + mu[i - 1]);
    for (std::size_t i = 0; i < n; ++i) out[i] = -1.0 / (1.0 / nu_terminal + tail[i]);
    return out;
}

HSystem solve_h_system(const FlowPath& flow, const PenaltyPath& penalty,
                       double zeta, double gamma) {
    validate_flow(flow);
    validate_penalty(flow, penalty);
    if (!(zeta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("solve_h_system: zeta and gamma must be positive");

    const auto& t = flow.times;
    const std::size_t n = t.size();
    std::vector<double> mu(n), half_phi(n);
    for (std::size_t i = 0; i < n; ++i) {
        mu[i] = gamma * (flow.a[i] + flow.b[i]);
        half_phi[i] = 0.5 * penalty.phi[i];
    }
    // h2' = -gamma(a+b) h2^2 + phi is the Riccati equation with mu = gamma(a+b).
    const RiccatiSolution ric = solve_riccati(t, mu, half_phi, penalty.A_terminal);

    HSystem sys;
    sys.times = t;
    sys.h2 = ric.P;

    auto rhs = [&](double s, const std::vector<double>& y, std::vector<double>& dydt) {
        const double a = interp_linear(t, flow.a, s);
        const double b = interp_linear(t, flow.b, s);
        const double h2 = interp_linear(t, sys.h2, s);
        const double h1 = y[0];
        dydt[0] = -zeta * (b - a) * h2 - gamma * (a + b) * h2 * h1;
        const double up = zeta / gamma - h1;
        const double dn = zeta / gamma + h1;
        dydt[1] = -zeta * (b - a) * h1 - 0.25 * gamma * (b * up * up + a * dn * dn);
    };
    const auto states = rk4_backward_grid(t, {0.0, 0.0}, rhs);
    sys.h1.resize(n);
    sys.h0.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sys.h1[i] = states[i][0];
        sys.h0[i] = states[i][1];
    }
    return sys;
}

std::pair<AffineField, Trajectory> solve_affine_fbsde(const FlowPath& flow,
                                                      const PenaltyPath& penalty,
                                                      double zeta, double gamma,
                                                      double q0) {
    validate_flow(flow);
    validate_penalty(flow, penalty);
    if (!(zeta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("solve_affine_fbsde: zeta and gamma must be positive");

    const auto& t = flow.times;
    const std::size_t n = t.size();
    const double A = penalty.A_terminal;

    std::vector<double> half_mu(n);
    for (std::size_t i = 0; i < n; ++i) half_mu[i] = 0.5 * gamma * (flow.a[i] + flow.b[i]);
    // dP/dt = -gamma(a+b)/2 P^2 + 2 phi, P(T) = -2A.
    const RiccatiSolution ric = solve_riccati(t, half_mu, penalty.phi, 2.0 * A);

    AffineField field;
    field.times = t;
    field.P = ric.P;

    // dH/dt = -gamma(a+b)/2 P H - zeta(b-a)/2 P, H(T) = 0.
    auto rhs_h = [&](double s, const std::vector<double>& y, std::vector<double>& dydt) {
        const double a = interp_linear(t, flow.a, s);
        const double b = interp_linear(t, flow.b, s);
        const double P = interp_linear(t, field.P, s);
        dydt[0] = -0.5 * gamma * (a + b) * P * y[0] - 0.5 * zeta * (b - a) * P;
    };
    const auto h_states = rk4_backward_grid(t, {0.0}, rhs_h);
    field.H.resize(n);
    for (std::size_t i = 0; i < n; ++i) field.H[i] = h_states[i][0];

    // dQ/dt = zeta(b-a)/2 + gamma(a+b)/2 (P Q + H), Q(0) = q0.
    auto rhs_q = [&](double s, const std::vector<double>& y, std::vector<double>& dydt) {
        const double a = interp_linear(t, flow.a, s);
        const double b = interp_linear(t, flow.b, s);
        const double P = interp_linear(t, field.P, s);
        const double H = interp_linear(t, field.H, s);
        dydt[0] = 0.5 * zeta * (b - a) + 0.5 * gamma * (a + b) * (P * y[0] + H);
    };
    const auto q_states = rk4_forward_grid(t, {q0}, rhs_q);

    Trajectory traj;
    traj.times = t;
    traj.Q.resize(n);
    traj.Y.resize(n);
    traj.delta_a.resize(n);
    traj.delta_b.resize(n);
    const double half_spread = 0.5 * zeta / gamma;
    std::vector<double> gain(n);
    for (std::size_t i = 0; i < n; ++i) {
        traj.Q[i] = q_states[i][0];
        traj.Y[i] = field.P[i] * traj.Q[i] + field.H[i];
        traj.delta_a[i] = half_spread + 0.5 * traj.Y[i];
        traj.delta_b[i] = half_spread - 0.5 * traj.Y[i];
        // Running quote revenue under the linear fill fraction zeta - gamma*delta.
        gain[i] = flow.a[i] * traj.delta_a[i] * (zeta - gamma * traj.delta_a[i]) +
                  flow.b[i] * traj.delta_b[i] * (zeta - gamma * traj.delta_b[i]);
    }
    traj.objective = trapezoid(t, gain) -
                     integrate_weighted_square_pl(t, penalty.phi, traj.Q) -
                     A * traj.Q.back() * traj.Q.back();
    return {std::move(field), std::move(traj)};
}

double impact_linear_closed_form(double zeta, double gamma, double A, double q0, double x) {
    if (!(A > 0.0)) throw std::invalid_argument("impact_linear_closed_form: A must be positive");
    if (!(zeta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("impact_linear_closed_form: zeta and gamma must be positive");
    if (!(x >= 0.0)) throw std::invalid_argument("impact_linear_closed_form: x must be >= 0");
    return 0.5 * zeta / gamma + 0.5 * (zeta * x - 2.0 * q0) / (1.0 / A + gamma * x);
}

ImpactRoot impact_exponential_root(double gamma, double A, double q0, double x) {
    if (!(A > 0.0)) throw std::invalid_argument("impact_exponential_root: A must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("impact_exponential_root: gamma must be positive");
    if (!(x >= 0.0)) throw std::invalid_argument("impact_exponential_root: x must be >= 0");

    ImpactRoot root;
    if (x == 0.0) {
        root.Q_T = q0;
        root.delta_a_T = 1.0 / gamma - 2.0 * A * q0;
        return root;
    }

    const auto F = [&](double y) { return y + x * std::exp(2.0 * gamma * A * y - 1.0) - q0; };
    double lo = q0 - x * std::exp(2.0 * gamma * A * std::abs(q0));
    double hi = q0;
    if (!(F(lo) <= 0.0) || !(F(hi) >= 0.0))
        throw numeric_error("impact_exponential_root: bracket failure");
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double f = F(mid);
        if (std::abs(f) <= 1e-12) break;
        if (f > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    if (std::abs(F(mid)) > 1e-12)
        throw numeric_error("impact_exponential_root: bisection did not reach tolerance");
    root.Q_T = mid;
    root.delta_a_T = 1.0 / gamma - 2.0 * A * mid;
    return root;
}

}  // namespace mmq
