#include "mmq/fbsde_field.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mmq/common.hpp"

namespace mmq {

namespace {

void check_grid(const QGrid& grid) {
    if (!(grid.q_min < grid.q_max)) throw std::invalid_argument("qgrid: q_min must be < q_max");
    if (grid.n_q < 3) throw std::invalid_argument("qgrid: need n_q >= 3");
    if (grid.n_t < 2) throw std::invalid_argument("qgrid: need n_t >= 2");
    if (!(grid.T > 0.0)) throw std::invalid_argument("qgrid: need T > 0");
}

std::size_t cfl_suggestion(double max_mu, double T, double dq) {
    const double steps = std::ceil(2.0 * max_mu * T / (0.9 * dq));
    return static_cast<std::size_t>(std::max(steps, 2.0)) + 2;
}

}  // namespace

double DecouplingField::at(double t, double q_pos) const {
    const double tc = std::clamp(t, times.front(), times.back());
    const double qc = std::clamp(q_pos, q.front(), q.back());
    const std::size_t i = bracket_index(times, tc);
    const std::size_t j = bracket_index(q, qc);
    const double wt = (tc - times[i]) / (times[i + 1] - times[i]);
    const double wq = (qc - q[j]) / (q[j + 1] - q[j]);
    const double lo = (1.0 - wq) * value(i, j) + wq * value(i, j + 1);
    const double hi = (1.0 - wq) * value(i + 1, j) + wq * value(i + 1, j + 1);
    return (1.0 - wt) * lo + wt * hi;
}

DecouplingField solve_decoupling_field(const FlowPath& flow, const PenaltyPath& penalty,
                                       const IntensityModel& model_a,
                                       const IntensityModel& model_b,
                                       const Truncation& trunc, const QGrid& grid) {
    check_grid(grid);
    validate_flow(flow);
    validate_penalty(flow, penalty);
    validate_model(model_a);
    validate_model(model_b);

    DecouplingField field;
    field.grid = grid;
    field.times = uniform_grid(0.0, grid.T, grid.n_t);
    field.q = uniform_grid(grid.q_min, grid.q_max, grid.n_q);
    field.u.assign(grid.n_t * grid.n_q, 0.0);

    const double A = penalty.A_terminal;
    const double dq = (grid.q_max - grid.q_min) / static_cast<double>(grid.n_q - 1);
    const std::size_t last = grid.n_t - 1;
    for (std::size_t j = 0; j < grid.n_q; ++j)
        field.u[last * grid.n_q + j] = -2.0 * A * field.q[j];

    // Terminal-slice CFL estimate before doing any work.
    {
        const double aT = interp_linear(flow.times, flow.a, grid.T);
        const double bT = interp_linear(flow.times, flow.b, grid.T);
        const double dt0 = grid.T / static_cast<double>(grid.n_t - 1);
        double max_mu = 0.0;
        for (std::size_t j = 0; j < grid.n_q; ++j) {
            const double m = forward_drift(model_a, model_b, aT, bT,
                                           field.u[last * grid.n_q + j], trunc);
            max_mu = std::max(max_mu, std::abs(m));
        }
        if (max_mu * dt0 / dq > 0.9) {
            std::ostringstream msg;
            msg << "cfl violation on terminal slice: |mu|*dt/dq = " << max_mu * dt0 / dq;
            throw cfl_error(msg.str(), cfl_suggestion(max_mu, grid.T, dq));
        }
    }

    std::vector<double> mu_row(grid.n_q);
    for (std::size_t i = last; i > 0; --i) {
        const double t_here = field.times[i];
        const double dt = t_here - field.times[i - 1];
        const double at = interp_linear(flow.times, flow.a, t_here);
        const double bt = interp_linear(flow.times, flow.b, t_here);
        const double phit = interp_linear(flow.times, penalty.phi, t_here);
        const double* u_here = field.u.data() + i * grid.n_q;
        double* u_prev = field.u.data() + (i - 1) * grid.n_q;

        double max_mu = 0.0;
        for (std::size_t j = 0; j < grid.n_q; ++j) {
            mu_row[j] = forward_drift(model_a, model_b, at, bt, u_here[j], trunc);
            max_mu = std::max(max_mu, std::abs(mu_row[j]));
        }
        if (max_mu * dt / dq > 0.9) {
            std::ostringstream msg;
            msg << "cfl violation at t = " << t_here << ": |mu|*dt/dq = " << max_mu * dt / dq;
            throw cfl_error(msg.str(), cfl_suggestion(max_mu, grid.T, dq));
        }

        for (std::size_t j = 0; j < grid.n_q; ++j) {
            const double m = mu_row[j];
            double slope = 0.0;
            if (m > 0.0)
                // Information comes from the right of the node going backward.
                slope = (j + 1 < grid.n_q) ? (u_here[j + 1] - u_here[j]) / dq
                                           : (u_here[j] - u_here[j - 1]) / dq;
            else if (m < 0.0)
                slope = (j > 0) ? (u_here[j] - u_here[j - 1]) / dq
                                : (u_here[j + 1] - u_here[j]) / dq;
            u_prev[j] = u_here[j] - dt * (2.0 * phit * field.q[j] - m * slope);
        }

        for (std::size_t j = 0; j + 1 < grid.n_q; ++j) {
            if (u_prev[j + 1] > u_prev[j] + 1e-10) {
                std::ostringstream msg;
                msg << "decoupling field lost monotonicity in q at t = " << field.times[i - 1]
                    << " (gap " << u_prev[j + 1] - u_prev[j] << ")";
                throw numeric_error(msg.str());
            }
        }
    }
    return field;
}

Trajectory forward_trajectory(const DecouplingField& field, const FlowPath& flow,
                              const PenaltyPath& penalty, const IntensityModel& model_a,
                              const IntensityModel& model_b, const Truncation& trunc,
                              double q0) {
    validate_flow(flow);
    validate_penalty(flow, penalty);
    const double dq = field.q[1] - field.q[0];
    if (!(q0 >= field.q.front() + dq) || !(q0 <= field.q.back() - dq))
        throw std::invalid_argument("forward_trajectory: q0 must sit inside the grid interior");

    const auto& t = field.times;
    auto rhs = [&](double s, const std::vector<double>& y, std::vector<double>& dydt) {
        const double a = interp_linear(flow.times, flow.a, s);
        const double b = interp_linear(flow.times, flow.b, s);
        dydt[0] = forward_drift(model_a, model_b, a, b, field.at(s, y[0]), trunc);
    };
    const auto states = rk4_forward_grid(t, {q0}, rhs);

    const std::size_t n = t.size();
    Trajectory traj;
    traj.times = t;
    traj.Q.resize(n);
    traj.Y.resize(n);
    traj.delta_a.resize(n);
    traj.delta_b.resize(n);
    std::vector<double> gain(n), phi_t(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double Q = states[i][0];
        if (Q < field.q.front() + 2.0 * dq || Q > field.q.back() - 2.0 * dq) {
            std::ostringstream msg;
            msg << "trajectory reached q = " << Q << " at t = " << t[i]
                << ", too close to the grid edge";
            throw domain_exit_error(msg.str());
        }
        traj.Q[i] = Q;
        traj.Y[i] = field.at(t[i], Q);
        traj.delta_a[i] = delta_star_truncated(model_a, traj.Y[i], trunc);
        traj.delta_b[i] = delta_star_truncated(model_b, -traj.Y[i], trunc);
        const double a = interp_linear(flow.times, flow.a, t[i]);
        const double b = interp_linear(flow.times, flow.b, t[i]);
        phi_t[i] = interp_linear(flow.times, penalty.phi, t[i]);
        gain[i] = a * traj.delta_a[i] * lambda_value(model_a, traj.delta_a[i]) +
                  b * traj.delta_b[i] * lambda_value(model_b, traj.delta_b[i]);
    }
    traj.objective = trapezoid(t, gain) - integrate_weighted_square_pl(t, phi_t, traj.Q) -
                     penalty.A_terminal * traj.Q.back() * traj.Q.back();
    return traj;
}

QGrid auto_qgrid(const FlowPath& flow, const PenaltyPath& penalty,
                 const IntensityModel& model_a, const IntensityModel& model_b,
                 const Truncation& trunc, double q0, std::size_t n_q,
                 std::size_t min_n_t) {
    validate_flow(flow);
    validate_penalty(flow, penalty);
    if (n_q < 3) throw std::invalid_argument("auto_qgrid: need n_q >= 3");

    const auto [int_a, int_b] = integrate_flow(flow);
    // Optimal inventories move far less than the raw volume; 15% of it plus a
    // fixed pad has held with room to spare on every tested configuration,
    // and forward_trajectory raises domain_exit_error if it ever does not.
    const double M = std::abs(q0) + 0.15 * (int_a + int_b) + 2.0;

    QGrid grid;
    grid.q_min = q0 - M;
    grid.q_max = q0 + M;
    grid.n_q = n_q;
    grid.T = flow.T();

    const double amax = *std::max_element(flow.a.begin(), flow.a.end());
    const double bmax = *std::max_element(flow.b.begin(), flow.b.end());
    const double dq = (grid.q_max - grid.q_min) / static_cast<double>(n_q - 1);
    double max_mu = 0.0;
    for (std::size_t j = 0; j < n_q; ++j) {
        const double qj = grid.q_min + dq * static_cast<double>(j);
        const double y = -2.0 * penalty.A_terminal * qj;
        const double la = std::abs(lambda_value(model_a, delta_star_truncated(model_a, y, trunc)));
        const double lb = std::abs(lambda_value(model_b, delta_star_truncated(model_b, -y, trunc)));
        max_mu = std::max(max_mu, amax * la + bmax * lb);
    }
    grid.n_t = std::max(min_n_t, cfl_suggestion(max_mu, grid.T, dq));
    return grid;
}

std::vector<ImpactPoint> impact_sweep(const FlowPath& base_flow, const PenaltyPath& penalty,
                                      const IntensityModel& model_a,
                                      const IntensityModel& model_b, const Truncation& trunc,
                                      const QGrid& grid, const std::vector<double>& targets,
                                      double q0) {
    if (targets.empty()) throw std::invalid_argument("impact_sweep: need at least one target");

    // One grid for the whole sweep, sized for the most demanding target, so
    // discretization error varies smoothly across the output curve.
    FlowPath worst = base_flow;
    double max_scale = 0.0;
    std::vector<FlowPath> scaled;
    scaled.reserve(targets.size());
    const auto [int_a, int_b] = integrate_flow(base_flow);
    for (double target : targets) {
        scaled.push_back(scale_to_imbalance(base_flow, target));
        max_scale = std::max(max_scale, (target + int_b) / int_a);
    }
    for (double& v : worst.a) v *= max_scale;

    QGrid work = auto_qgrid(worst, penalty, model_a, model_b, trunc, q0,
                            grid.n_q >= 3 ? grid.n_q : 800,
                            std::max<std::size_t>(grid.n_t, 2));

    std::vector<ImpactPoint> out;
    out.reserve(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
        for (int attempt = 0;; ++attempt) {
            try {
                const DecouplingField field =
                    solve_decoupling_field(scaled[k], penalty, model_a, model_b, trunc, work);
                const Trajectory traj = forward_trajectory(field, scaled[k], penalty, model_a,
                                                           model_b, trunc, q0);
                ImpactPoint pt;
                pt.imbalance = targets[k];
                pt.delta_a_T = traj.delta_a.back();
                pt.Q_T = traj.Q.back();
                out.push_back(pt);
                break;
            } catch (const domain_exit_error&) {
                if (attempt >= 2) throw;
                const double mid = 0.5 * (work.q_min + work.q_max);
                const double half = (work.q_max - work.q_min);  // doubled half-width
                work.q_min = mid - half;
                work.q_max = mid + half;
                work.n_t *= 2;  // dq doubled, so keep the CFL number intact
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const ImpactPoint& l, const ImpactPoint& r) { return l.imbalance < r.imbalance; });
    return out;
}

PowerFit power_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("power_fit: need at least 3 points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0))
            throw std::invalid_argument("power_fit: coordinates must be strictly positive");
        sx += std::log(x);
        sy += std::log(y);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("power_fit: all x values identical");

    PowerFit fit;
    fit.beta = sxy / sxx;
    fit.c = std::exp(my - fit.beta * mx);
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [x, y] : points) {
        const double pred = (my - fit.beta * mx) + fit.beta * std::log(x);
        const double resid = std::log(y) - pred;
        ss_res += resid * resid;
        const double dy = std::log(y) - my;
        ss_tot += dy * dy;
    }
    fit.r2 = (ss_tot == 0.0) ? (ss_res == 0.0 ? 1.0 : 0.0) : 1.0 - ss_res / ss_tot;
    return fit;
}

MonotonicityReport monotonicity_check(const DecouplingField& field, const FlowPath& flow,
                                      const PenaltyPath& penalty,
                                      const IntensityModel& model_a,
                                      const IntensityModel& model_b, const Truncation& trunc,
                                      const std::vector<double>& q_list, double tol) {
    for (std::size_t i = 1; i < q_list.size(); ++i)
        if (!(q_list[i] > q_list[i - 1]))
            throw std::invalid_argument("monotonicity_check: q_list must be strictly increasing");

    MonotonicityReport report;
    if (q_list.size() < 2) {
        report.note = "fewer than two start points; nothing to compare";
        return report;
    }
    std::vector<Trajectory> runs;
    runs.reserve(q_list.size());
    for (double q0 : q_list)
        runs.push_back(forward_trajectory(field, flow, penalty, model_a, model_b, trunc, q0));

    for (std::size_t k = 1; k < runs.size(); ++k) {
        for (std::size_t i = 0; i < runs[k].times.size(); ++i) {
            // Larger q0 must quote tighter asks and wider bids.
            const double ask_breach = runs[k].delta_a[i] - runs[k - 1].delta_a[i];
            const double bid_breach = runs[k - 1].delta_b[i] - runs[k].delta_b[i];
            report.worst_violation = std::max({report.worst_violation, ask_breach, bid_breach});
        }
    }
    report.ok = report.worst_violation <= tol;
    if (!report.ok) {
        std::ostringstream msg;
        msg << "quote ordering violated by " << report.worst_violation << " (tol " << tol << ")";
        report.note = msg.str();
    }
    return report;
}

void write_field_csv(std::ostream& os, const DecouplingField& field) {
    os << "t,q,u\n";
    for (std::size_t i = 0; i < field.times.size(); ++i)
        for (std::size_t j = 0; j < field.q.size(); ++j)
            os << format_g17(field.times[i]) << ',' << format_g17(field.q[j]) << ','
               << format_g17(field.value(i, j)) << "\n";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,Q,Y,delta_a,delta_b\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        os << format_g17(traj.times[i]) << ',' << format_g17(traj.Q[i]) << ','
           << format_g17(traj.Y[i]) << ',' << format_g17(traj.delta_a[i]) << ','
           << format_g17(traj.delta_b[i]) << "\n";
}

}  // namespace mmq
