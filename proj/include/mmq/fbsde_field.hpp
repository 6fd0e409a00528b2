#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mmq/flow.hpp"
#include "mmq/intensity.hpp"
#include "mmq/riccati.hpp"

namespace mmq {

// Uniform (t, q) lattice for the decoupling-field solver.
struct QGrid {
    double q_min = 0.0;
    double q_max = 0.0;
    std::size_t n_q = 0;
    std::size_t n_t = 0;
    double T = 0.0;
};

// u(t, q): the adjoint value started from inventory q at time t, so that
// Y_t = u(t, Q_t) along optimal trajectories.  Nonincreasing in q at every
// time slice; u(T, q) = -2 A q exactly.
struct DecouplingField {
    QGrid grid;
    std::vector<double> times;  // n_t entries
    std::vector<double> q;      // n_q entries
    std::vector<double> u;      // row-major, u[i_t * n_q + j_q]

    double value(std::size_t i_t, std::size_t j_q) const { return u[i_t * grid.n_q + j_q]; }
    // Bilinear interpolation, clamped to the lattice hull.
    double at(double t, double q_pos) const;
};

// Backward upwind solve of  u_t + mu(u) u_q = 2 phi(t) q,  u(T,q) = -2 A q,
// where mu is the net inventory drift induced by the quote feedback.  The
// spatial difference side follows the sign of mu at each node; the CFL number
// max|mu| dt/dq must stay <= 0.9 (checked from the terminal slice up front
// and re-checked every step; violations raise cfl_error with a usable n_t).
// Monotonicity of u in q is asserted per slice (tolerance 1e-10).
DecouplingField solve_decoupling_field(const FlowPath& flow, const PenaltyPath& penalty,
                                       const IntensityModel& model_a,
                                       const IntensityModel& model_b,
                                       const Truncation& trunc, const QGrid& grid);

// Forward RK4 of Q' = mu(u(t, Q)) from q0, then Y = u(t, Q), quotes from the
// truncated feedback rule, and the realized objective
//   int [a delta_a La(delta_a) + b delta_b Lb(delta_b) - phi Q^2] dt - A Q_T^2.
// Throws domain_exit_error if the path leaves the grid interior by more than
// two cells from either edge (callers rerun on a wider grid).
Trajectory forward_trajectory(const DecouplingField& field, const FlowPath& flow,
                              const PenaltyPath& penalty, const IntensityModel& model_a,
                              const IntensityModel& model_b, const Truncation& trunc,
                              double q0);

// Spatial domain and time resolution that keep the solve stable: q range wide
// enough for the trajectories the flow can generate, n_t from the terminal
// slice CFL estimate with a 2x margin.
QGrid auto_qgrid(const FlowPath& flow, const PenaltyPath& penalty,
                 const IntensityModel& model_a, const IntensityModel& model_b,
                 const Truncation& trunc, double q0, std::size_t n_q,
                 std::size_t min_n_t = 401);

struct ImpactPoint {
    double imbalance = 0.0;
    double delta_a_T = 0.0;
    double Q_T = 0.0;
};

// For each target imbalance: rescale the base flow, solve the field, run the
// trajectory from q0, and record the terminal ask quote.  Grids are re-sized
// per target (the supplied grid acts as a resolution template); domain exits
// retry once on a doubled domain.  Output is sorted by imbalance.
std::vector<ImpactPoint> impact_sweep(const FlowPath& base_flow, const PenaltyPath& penalty,
                                      const IntensityModel& model_a,
                                      const IntensityModel& model_b, const Truncation& trunc,
                                      const QGrid& grid, const std::vector<double>& targets,
                                      double q0);

struct PowerFit {
    double c = 0.0;
    double beta = 0.0;
    double r2 = 0.0;
};

// Least squares of log y on log x over strictly positive points: y ~ c x^beta.
PowerFit power_fit(const std::vector<std::pair<double, double>>& points);

struct MonotonicityReport {
    bool ok = true;
    double worst_violation = 0.0;  // largest ordering breach found (>= 0)
    std::string note;
};

// Trajectories from an increasing list of initial inventories must produce
// ask quotes pointwise nonincreasing in q0 and bid quotes nondecreasing, up
// to `tol`.  Violations are reported, not thrown.
MonotonicityReport monotonicity_check(const DecouplingField& field, const FlowPath& flow,
                                      const PenaltyPath& penalty,
                                      const IntensityModel& model_a,
                                      const IntensityModel& model_b, const Truncation& trunc,
                                      const std::vector<double>& q_list, double tol);

// CSV emission: field rows "t,q,u"; trajectory rows "t,Q,Y,delta_a,delta_b".
void write_field_csv(std::ostream& os, const DecouplingField& field);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace mmq
