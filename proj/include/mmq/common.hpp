#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmq {

// Failures of the numerics themselves (divergence, instability, band
// violations).  Everything user-input related stays std::invalid_argument so
// the CLI can map the two families onto distinct exit codes.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Advection step would outrun the grid; carries a usable time resolution.
struct cfl_error : numeric_error {
    cfl_error(const std::string& msg, std::size_t suggested)
        : numeric_error(msg), suggested_n_t(suggested) {}
    std::size_t suggested_n_t;
};

// A forward trajectory left the interior of its spatial grid.
struct domain_exit_error : numeric_error {
    using numeric_error::numeric_error;
};

// n equally spaced points covering [t0, t1], endpoints exact.
std::vector<double> uniform_grid(double t0, double t1, std::size_t n);

// Trapezoid rule on an arbitrary strictly increasing grid.
double trapezoid(const std::vector<double>& t, const std::vector<double>& f);

// Integral of the square of a piecewise-linear function.  Exact (each segment
// integrates a quadratic in closed form), which the plain trapezoid rule is
// not; used for running inventory penalties.
double integrate_square_pl(const std::vector<double>& t, const std::vector<double>& f);

// Integral of w(t)*f(t)^2 with both inputs piecewise linear on the grid.
// Per-segment Simpson, exact for the resulting cubic.
double integrate_weighted_square_pl(const std::vector<double>& t,
                                    const std::vector<double>& w,
                                    const std::vector<double>& f);

// Piecewise-linear interpolation, clamped at both ends.
double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x);

// Index i with xs[i] <= x < xs[i+1], clamped to [0, xs.size()-2].
std::size_t bracket_index(const std::vector<double>& xs, double x);

// SplitMix64-style hash for deriving independent substream seeds from a master
// seed and a counter; lets path/trial loops stay order-independent.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t counter);

// Round-trip decimal formatting ("%.17g") so CSV output re-reads bit-exactly.
std::string format_g17(double v);

// Thomas algorithm for a tridiagonal system; diagonals lo/diag/up, rhs d.
// lo[0] and up[n-1] unused.  Overwrites nothing; returns the solution.
std::vector<double> solve_tridiagonal(const std::vector<double>& lo,
                                      const std::vector<double>& diag,
                                      const std::vector<double>& up,
                                      const std::vector<double>& d);

namespace detail {

// One classical RK4 step from t0 to t1 (h may be negative for backward
// sweeps).  rhs fills dydt from (t, y).
template <class Rhs>
std::vector<double> rk4_step(double t0, double t1, const std::vector<double>& y, Rhs&& rhs) {
    const double h = t1 - t0;
    const std::size_t m = y.size();
    std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m), out(m);
    rhs(t0, y, k1);
    for (std::size_t j = 0; j < m; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    rhs(t0 + 0.5 * h, tmp, k2);
    for (std::size_t j = 0; j < m; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    rhs(t0 + 0.5 * h, tmp, k3);
    for (std::size_t j = 0; j < m; ++j) tmp[j] = y[j] + h * k3[j];
    rhs(t1, tmp, k4);
    for (std::size_t j = 0; j < m; ++j)
        out[j] = y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    return out;
}

}  // namespace detail

// RK4 sweep over the whole grid starting from the initial state; result[i] is
// the state at times[i].
template <class Rhs>
std::vector<std::vector<double>> rk4_forward_grid(const std::vector<double>& times,
                                                  std::vector<double> y0, Rhs&& rhs) {
    std::vector<std::vector<double>> out(times.size());
    out[0] = std::move(y0);
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        out[i + 1] = detail::rk4_step(times[i], times[i + 1], out[i], rhs);
    return out;
}

// Same sweep run from the terminal state backward to t0.
template <class Rhs>
std::vector<std::vector<double>> rk4_backward_grid(const std::vector<double>& times,
                                                   std::vector<double> yT, Rhs&& rhs) {
    std::vector<std::vector<double>> out(times.size());
    out[times.size() - 1] = std::move(yT);
    for (std::size_t i = times.size() - 1; i > 0; --i)
        out[i - 1] = detail::rk4_step(times[i], times[i - 1], out[i], rhs);
    return out;
}

}  // namespace mmq
