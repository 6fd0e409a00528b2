#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mmq/fbsde_field.hpp"

namespace mmq {

// Point-process market-making setup: orders of size delta_size arrive with
// intensities lambda_{a,b} * exp(-gamma * quote); mid-price variance sigma^2.
struct ASParams {
    double delta_size = 1.0;  // order size, also the inventory lattice pitch
    double lambda_a = 0.0;
    double lambda_b = 0.0;
    double sigma = 0.0;
    double A = 0.0;
    double gamma = 1.0;
    double T = 1.0;
    double q_bound = 0.0;  // inventory lattice covers [-q_bound, q_bound]
};

// theta(t, q): the inventory-dependent part of the value function, either on
// the discrete lattice (pitch delta_size) or on a fine continuous grid.
struct ThetaSurface {
    std::vector<double> times;
    std::vector<double> q;
    std::vector<double> theta;  // row-major, [i_t * q.size() + k]

    double value(std::size_t i, std::size_t k) const { return theta[i * q.size() + k]; }
};

void validate_as_params(const ASParams& p);

// Backward RK4 over the coupled lattice ODEs
//   theta_t = sigma^2 q^2 / 2
//           - delta lambda_b W((theta(q) - theta(q+delta))/delta)
//           - delta lambda_a W((theta(q) - theta(q-delta))/delta)
// with terminal -A q^2; W is the optimised-spread function of the exponential
// intensity.  Edge states drop the term whose neighbour is missing (quoting
// in the exiting direction is disabled).
ThetaSurface solve_theta_discrete(const ASParams& p, std::size_t n_t);

// Quotes delta_a = delta*((theta(q)-theta(q-delta))/delta) (ask, needs the
// lower neighbour) and delta_b likewise with the upper one; NaN marks the
// disabled edge-state side.
struct QuoteLattice {
    std::vector<double> times;
    std::vector<double> q;
    std::vector<double> delta_a;  // row-major
    std::vector<double> delta_b;
};

QuoteLattice optimal_quotes_discrete(const ThetaSurface& theta, const ASParams& p);

struct SimResult {
    std::vector<double> times;
    std::vector<double> mean_q;
    std::vector<double> std_err;
    std::vector<double> q_states;
    std::vector<std::vector<double>> occupancy;  // [time][state] path counts
    bool accuracy_warning = false;  // some un-clipped step probability > 0.1
    double max_step_prob = 0.0;
    double edge_fraction = 0.0;  // share of samples sitting on the lattice edge
};

// Thin-step Bernoulli simulation of executions under the lattice quotes: per
// step, each side fills with probability min(1, lambda * Lambda(quote) * dt).
// Reproducible from the seed with per-path substreams.
SimResult simulate_as_paths(const ThetaSurface& theta, const ASParams& p, double q0,
                            std::uint64_t seed, std::size_t n_paths, std::size_t n_steps);

// Macroscopic analogue on a continuous inventory grid:
//   theta_t = sigma^2 q^2 / 2 - delta lambda_b W(-dtheta/dq)
//                             - delta lambda_a W(dtheta/dq)
// solved backward by RK4 with the one-sided differences that mirror the
// lattice quotients (ask term looks down, bid term looks up); edge nodes drop
// the missing side.  Throws numeric_error with a suggested n_t when the
// explicit stepping blows past ten times the data scale.
ThetaSurface solve_theta_macro(const ASParams& p, const QGrid& grid);

// Deterministic inventory ODE under the macroscopic feedback quotes:
//   dQ/dt = delta lambda_b Lambda(delta_b) - delta lambda_a Lambda(delta_a),
// quotes from the interpolated gradient of theta.
std::vector<double> macro_inventory_path(const ThetaSurface& theta_macro, const ASParams& p,
                                         double q0);

struct CompareRow {
    double delta_size = 0.0;
    double sup_gap = 0.0;            // sup_q |theta(0,q) - theta_macro(0,q)|
    std::vector<double> q;           // lattice points inside the window
    std::vector<double> theta_discrete;
    std::vector<double> theta_macro;
};

// For each pitch in `deltas`: solve both surfaces and tabulate the t = 0 gap
// over the lattice points inside [q_lo, q_hi].
std::vector<CompareRow> compare_theta(const ASParams& base, const std::vector<double>& deltas,
                                      double q_lo, double q_hi);

void write_theta_csv(std::ostream& os, const ThetaSurface& s);
void write_mean_path_csv(std::ostream& os, const SimResult& sim);
void write_heatmap_csv(std::ostream& os, const SimResult& sim);

}  // namespace mmq
