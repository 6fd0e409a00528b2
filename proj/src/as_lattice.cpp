#include "mmq/as_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mmq/common.hpp"
#include "mmq/intensity.hpp"

namespace mmq {

namespace {

std::size_t lattice_halfcount(const ASParams& p) {
    const double r = p.q_bound / p.delta_size;
    const double rounded = std::round(r);
    if (std::abs(r - rounded) > 1e-9)
        throw std::invalid_argument("as params: q_bound must be a multiple of delta_size");
    return static_cast<std::size_t>(rounded);
}

std::vector<double> lattice_points(const ASParams& p) {
    const std::size_t half = lattice_halfcount(p);
    std::vector<double> q(2 * half + 1);
    for (std::size_t k = 0; k < q.size(); ++k)
        q[k] = -p.q_bound + p.delta_size * static_cast<double>(k);
    return q;
}

}  // namespace

void validate_as_params(const ASParams& p) {
    if (!(p.delta_size > 0.0)) throw std::invalid_argument("as params: delta_size must be > 0");
    if (!(p.lambda_a >= 0.0) || !(p.lambda_b >= 0.0))
        throw std::invalid_argument("as params: intensities must be >= 0");
    if (!(p.sigma >= 0.0)) throw std::invalid_argument("as params: sigma must be >= 0");
    if (!(p.A >= 0.0)) throw std::invalid_argument("as params: A must be >= 0");
    if (!(p.gamma > 0.0)) throw std::invalid_argument("as params: gamma must be > 0");
    if (!(p.T > 0.0)) throw std::invalid_argument("as params: T must be > 0");
    if (!(p.q_bound > 0.0)) throw std::invalid_argument("as params: q_bound must be > 0");
    lattice_halfcount(p);
}

ThetaSurface solve_theta_discrete(const ASParams& p, std::size_t n_t) {
    validate_as_params(p);
    if (n_t < 2) throw std::invalid_argument("solve_theta_discrete: need n_t >= 2");

    ThetaSurface s;
    s.times = uniform_grid(0.0, p.T, n_t);
    s.q = lattice_points(p);
    const std::size_t K = s.q.size();
    const IntensityModel model = ExponentialIntensity{p.gamma};
    const double d = p.delta_size;

    std::vector<double> terminal(K);
    for (std::size_t k = 0; k < K; ++k) terminal[k] = -p.A * s.q[k] * s.q[k];

    auto rhs = [&](double, const std::vector<double>& th, std::vector<double>& out) {
        for (std::size_t k = 0; k < K; ++k) {
            double v = 0.5 * p.sigma * p.sigma * s.q[k] * s.q[k];
            if (k + 1 < K)  // buying allowed: inventory can move up
                v -= d * p.lambda_b * w_value(model, (th[k] - th[k + 1]) / d);
            if (k > 0)  // selling allowed: inventory can move down
                v -= d * p.lambda_a * w_value(model, (th[k] - th[k - 1]) / d);
            out[k] = v;
        }
    };
    const auto states = rk4_backward_grid(s.times, terminal, rhs);
    s.theta.resize(n_t * K);
    for (std::size_t i = 0; i < n_t; ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            const double v = states[i][k];
            if (!std::isfinite(v))
                throw numeric_error("solve_theta_discrete: non-finite value produced");
            s.theta[i * K + k] = v;
        }
    }
    return s;
}

QuoteLattice optimal_quotes_discrete(const ThetaSurface& theta, const ASParams& p) {
    const std::size_t K = theta.q.size();
    const std::size_t n_t = theta.times.size();
    const IntensityModel model = ExponentialIntensity{p.gamma};
    const double d = p.delta_size;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    QuoteLattice out;
    out.times = theta.times;
    out.q = theta.q;
    out.delta_a.assign(n_t * K, nan);
    out.delta_b.assign(n_t * K, nan);
    for (std::size_t i = 0; i < n_t; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            if (k > 0)
                out.delta_a[i * K + k] =
                    delta_star(model, (theta.value(i, k) - theta.value(i, k - 1)) / d);
            if (k + 1 < K)
                out.delta_b[i * K + k] =
                    delta_star(model, (theta.value(i, k) - theta.value(i, k + 1)) / d);
        }
    return out;
}

SimResult simulate_as_paths(const ThetaSurface& theta, const ASParams& p, double q0,
                            std::uint64_t seed, std::size_t n_paths, std::size_t n_steps) {
    validate_as_params(p);
    if (n_paths < 1) throw std::invalid_argument("simulate_as_paths: need n_paths >= 1");
    if (n_steps < 1) throw std::invalid_argument("simulate_as_paths: need n_steps >= 1");
    const std::size_t K = theta.q.size();
    const double start = (q0 + p.q_bound) / p.delta_size;
    if (std::abs(start - std::round(start)) > 1e-9 || start < -0.5 ||
        std::round(start) > static_cast<double>(K - 1))
        throw std::invalid_argument("simulate_as_paths: q0 must be a lattice state");
    const std::size_t k0 = static_cast<std::size_t>(std::round(start));

    SimResult sim;
    sim.times = uniform_grid(0.0, p.T, n_steps + 1);
    sim.q_states = theta.q;
    const double dt = p.T / static_cast<double>(n_steps);
    const IntensityModel model = ExponentialIntensity{p.gamma};
    const double d = p.delta_size;

    // Fill probabilities per (step, state), from quotes at the step start.
    std::vector<double> pa(n_steps * K, 0.0), pb(n_steps * K, 0.0);
    std::vector<double> slice(K);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = sim.times[i];
        for (std::size_t k = 0; k < K; ++k) {
            // interpolate theta over its own time grid
            const std::size_t it = bracket_index(theta.times, t);
            const double w =
                (t - theta.times[it]) / (theta.times[it + 1] - theta.times[it]);
            slice[k] = (1.0 - w) * theta.value(it, k) + w * theta.value(it + 1, k);
        }
        for (std::size_t k = 0; k < K; ++k) {
            if (k > 0) {
                const double quote = delta_star(model, (slice[k] - slice[k - 1]) / d);
                const double raw = p.lambda_a * lambda_value(model, quote) * dt;
                sim.max_step_prob = std::max(sim.max_step_prob, raw);
                pa[i * K + k] = std::min(1.0, raw);
            }
            if (k + 1 < K) {
                const double quote = delta_star(model, (slice[k] - slice[k + 1]) / d);
                const double raw = p.lambda_b * lambda_value(model, quote) * dt;
                sim.max_step_prob = std::max(sim.max_step_prob, raw);
                pb[i * K + k] = std::min(1.0, raw);
            }
        }
    }
    sim.accuracy_warning = sim.max_step_prob > 0.1;

    std::vector<double> sum(n_steps + 1, 0.0), sumsq(n_steps + 1, 0.0);
    sim.occupancy.assign(n_steps + 1, std::vector<double>(K, 0.0));
    std::size_t edge_hits = 0;
    for (std::size_t path = 0; path < n_paths; ++path) {
        std::mt19937_64 rng(mix_seed(seed, path));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::size_t k = k0;
        for (std::size_t i = 0; i <= n_steps; ++i) {
            const double qv = sim.q_states[k];
            sum[i] += qv;
            sumsq[i] += qv * qv;
            sim.occupancy[i][k] += 1.0;
            if (k == 0 || k == K - 1) ++edge_hits;
            if (i == n_steps) break;
            int jump = 0;
            const double u_ask = unif(rng);
            const double u_bid = unif(rng);
            if (u_ask < pa[i * K + k]) --jump;   // we sold one unit
            if (u_bid < pb[i * K + k]) ++jump;   // we bought one unit
            k = static_cast<std::size_t>(static_cast<long>(k) + jump);
        }
    }

    const double np = static_cast<double>(n_paths);
    sim.mean_q.resize(n_steps + 1);
    sim.std_err.resize(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) {
        const double mean = sum[i] / np;
        sim.mean_q[i] = mean;
        if (n_paths > 1) {
            const double var = std::max(0.0, (sumsq[i] - np * mean * mean) / (np - 1.0));
            sim.std_err[i] = std::sqrt(var / np);
        }
    }
    sim.edge_fraction =
        static_cast<double>(edge_hits) / (np * static_cast<double>(n_steps + 1));
    return sim;
}

ThetaSurface solve_theta_macro(const ASParams& p, const QGrid& grid) {
    validate_as_params(p);
    if (grid.n_q < 3 || grid.n_t < 2 || !(grid.q_min < grid.q_max))
        throw std::invalid_argument("solve_theta_macro: malformed grid");
    if (std::abs(grid.T - p.T) > 1e-12)
        throw std::invalid_argument("solve_theta_macro: grid horizon must match params");

    ThetaSurface s;
    s.times = uniform_grid(0.0, p.T, grid.n_t);
    s.q = uniform_grid(grid.q_min, grid.q_max, grid.n_q);
    const std::size_t n = grid.n_q;
    const double dq = s.q[1] - s.q[0];
    const IntensityModel model = ExponentialIntensity{p.gamma};
    const double d = p.delta_size;

    std::vector<double> state(n);
    for (std::size_t j = 0; j < n; ++j) state[j] = -p.A * s.q[j] * s.q[j];

    const double qmax = std::max(std::abs(grid.q_min), std::abs(grid.q_max));
    const double data_bound =
        (p.A + 0.5 * p.sigma * p.sigma * p.T) * qmax * qmax +
        d * (p.lambda_a + p.lambda_b) * p.T * std::exp(1.0) / p.gamma + 1.0;

    auto rhs = [&](double, const std::vector<double>& th, std::vector<double>& out) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0.5 * p.sigma * p.sigma * s.q[j] * s.q[j];
            if (j + 1 < n)  // bid term mirrors (theta(q) - theta(q+delta))/delta
                v -= d * p.lambda_b * w_value(model, (th[j] - th[j + 1]) / dq);
            if (j > 0)      // ask term mirrors (theta(q) - theta(q-delta))/delta
                v -= d * p.lambda_a * w_value(model, (th[j] - th[j - 1]) / dq);
            out[j] = v;
        }
    };

    s.theta.resize(grid.n_t * n);
    std::copy(state.begin(), state.end(), s.theta.begin() + (grid.n_t - 1) * n);
    for (std::size_t i = grid.n_t - 1; i > 0; --i) {
        state = detail::rk4_step(s.times[i], s.times[i - 1], state, rhs);
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(state[j]) || std::abs(state[j]) > 10.0 * data_bound) {
                std::ostringstream msg;
                msg << "solve_theta_macro: unstable step at t = " << s.times[i - 1]
                    << "; retry with n_t >= " << 2 * grid.n_t;
                throw numeric_error(msg.str());
            }
            s.theta[(i - 1) * n + j] = state[j];
        }
    }
    return s;
}

std::vector<double> macro_inventory_path(const ThetaSurface& theta_macro, const ASParams& p,
                                         double q0) {
    const std::size_t n = theta_macro.q.size();
    const std::size_t n_t = theta_macro.times.size();
    const double dq = theta_macro.q[1] - theta_macro.q[0];
    if (!(q0 > theta_macro.q.front()) || !(q0 < theta_macro.q.back()))
        throw std::invalid_argument("macro_inventory_path: q0 outside the grid");

    // Gradient surface: central differences inside, one-sided at the edges.
    std::vector<double> grad(n_t * n);
    for (std::size_t i = 0; i < n_t; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double g;
            if (j == 0)
                g = (theta_macro.value(i, 1) - theta_macro.value(i, 0)) / dq;
            else if (j + 1 == n)
                g = (theta_macro.value(i, j) - theta_macro.value(i, j - 1)) / dq;
            else
                g = (theta_macro.value(i, j + 1) - theta_macro.value(i, j - 1)) / (2.0 * dq);
            grad[i * n + j] = g;
        }

    const IntensityModel model = ExponentialIntensity{p.gamma};
    const double d = p.delta_size;
    auto grad_at = [&](double t, double qv) {
        const double tc = std::clamp(t, theta_macro.times.front(), theta_macro.times.back());
        const double qc = std::clamp(qv, theta_macro.q.front(), theta_macro.q.back());
        const std::size_t i = bracket_index(theta_macro.times, tc);
        const std::size_t j = bracket_index(theta_macro.q, qc);
        const double wt = (tc - theta_macro.times[i]) /
                          (theta_macro.times[i + 1] - theta_macro.times[i]);
        const double wq = (qc - theta_macro.q[j]) / dq;
        const double lo = (1.0 - wq) * grad[i * n + j] + wq * grad[i * n + j + 1];
        const double hi = (1.0 - wq) * grad[(i + 1) * n + j] + wq * grad[(i + 1) * n + j + 1];
        return (1.0 - wt) * lo + wt * hi;
    };
    auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& dydt) {
        const double g = grad_at(t, y[0]);
        const double fill_a = lambda_value(model, delta_star(model, g));
        const double fill_b = lambda_value(model, delta_star(model, -g));
        dydt[0] = d * p.lambda_b * fill_b - d * p.lambda_a * fill_a;
    };
    const auto states = rk4_forward_grid(theta_macro.times, {q0}, rhs);
    std::vector<double> out(n_t);
    for (std::size_t i = 0; i < n_t; ++i) out[i] = states[i][0];
    return out;
}

std::vector<CompareRow> compare_theta(const ASParams& base, const std::vector<double>& deltas,
                                      double q_lo, double q_hi) {
    if (deltas.empty()) throw std::invalid_argument("compare_theta: need at least one delta");
    if (!(q_lo < q_hi)) throw std::invalid_argument("compare_theta: window must be nonempty");

    std::vector<CompareRow> rows;
    rows.reserve(deltas.size());
    for (double d : deltas) {
        ASParams p = base;
        p.delta_size = d;
        const double span = std::max(std::abs(q_lo), std::abs(q_hi)) + 5.0;
        p.q_bound = std::ceil(span / d) * d;

        const ThetaSurface disc = solve_theta_discrete(p, 1001);

        QGrid grid;
        // dq = 0.05 puts every lattice point used in practice exactly on a
        // macro node, so the comparison has no interpolation error.
        grid.q_min = -p.q_bound;
        grid.q_max = p.q_bound;
        grid.n_q = static_cast<std::size_t>(std::llround(2.0 * p.q_bound / 0.05)) + 1;
        grid.n_t = 2001;
        grid.T = p.T;
        const ThetaSurface macro = solve_theta_macro(p, grid);

        const std::vector<double> macro_t0(macro.theta.begin(),
                                           macro.theta.begin() +
                                               static_cast<std::ptrdiff_t>(macro.q.size()));

        CompareRow row;
        row.delta_size = d;
        for (std::size_t k = 0; k < disc.q.size(); ++k) {
            const double qv = disc.q[k];
            if (qv < q_lo - 1e-12 || qv > q_hi + 1e-12) continue;
            row.q.push_back(qv);
            row.theta_discrete.push_back(disc.value(0, k));
            row.theta_macro.push_back(interp_linear(macro.q, macro_t0, qv));
            row.sup_gap = std::max(row.sup_gap,
                                   std::abs(row.theta_discrete.back() - row.theta_macro.back()));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_theta_csv(std::ostream& os, const ThetaSurface& s) {
    os << "t,q,theta\n";
    for (std::size_t i = 0; i < s.times.size(); ++i)
        for (std::size_t k = 0; k < s.q.size(); ++k)
            os << format_g17(s.times[i]) << ',' << format_g17(s.q[k]) << ','
               << format_g17(s.value(i, k)) << "\n";
}

void write_mean_path_csv(std::ostream& os, const SimResult& sim) {
    os << "t,mean_q,stderr\n";
    for (std::size_t i = 0; i < sim.times.size(); ++i)
        os << format_g17(sim.times[i]) << ',' << format_g17(sim.mean_q[i]) << ','
           << format_g17(sim.std_err[i]) << "\n";
}

void write_heatmap_csv(std::ostream& os, const SimResult& sim) {
    os << "t,q,count\n";
    for (std::size_t i = 0; i < sim.times.size(); ++i)
        for (std::size_t k = 0; k < sim.q_states.size(); ++k)
            os << format_g17(sim.times[i]) << ',' << format_g17(sim.q_states[k]) << ','
               << format_g17(sim.occupancy[i][k]) << "\n";
}

}  // namespace mmq
