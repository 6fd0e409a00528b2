#include "mmq/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mmq {

std::vector<double> uniform_grid(double t0, double t1, std::size_t n) {
    if (n < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
    if (!(t1 > t0)) throw std::invalid_argument("uniform_grid: t1 must exceed t0");
    std::vector<double> t(n);
    const double dt = (t1 - t0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) t[i] = t0 + dt * static_cast<double>(i);
    t.back() = t1;
    return t;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    if (t.size() != f.size() || t.size() < 2)
        throw std::invalid_argument("trapezoid: mismatched or short arrays");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        s += 0.5 * (f[i] + f[i + 1]) * (t[i + 1] - t[i]);
    return s;
}

double integrate_square_pl(const std::vector<double>& t, const std::vector<double>& f) {
    if (t.size() != f.size() || t.size() < 2)
        throw std::invalid_argument("integrate_square_pl: mismatched or short arrays");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double h = t[i + 1] - t[i];
        const double y0 = f[i], y1 = f[i + 1];
        s += h * (y0 * y0 + y0 * y1 + y1 * y1) / 3.0;
    }
    return s;
}

double integrate_weighted_square_pl(const std::vector<double>& t,
                                    const std::vector<double>& w,
                                    const std::vector<double>& f) {
    if (t.size() != f.size() || t.size() != w.size() || t.size() < 2)
        throw std::invalid_argument("integrate_weighted_square_pl: mismatched arrays");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double h = t[i + 1] - t[i];
        const double g0 = w[i] * f[i] * f[i];
        const double g1 = w[i + 1] * f[i + 1] * f[i + 1];
        const double fm = 0.5 * (f[i] + f[i + 1]);
        const double gm = 0.5 * (w[i] + w[i + 1]) * fm * fm;
        s += h * (g0 + 4.0 * gm + g1) / 6.0;
    }
    return s;
}

std::size_t bracket_index(const std::vector<double>& xs, double x) {
    if (xs.size() < 2) throw std::invalid_argument("bracket_index: need at least 2 points");
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = (it == xs.begin()) ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    return std::min(i, xs.size() - 2);
}

double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (xs.size() != ys.size()) throw std::invalid_argument("interp_linear: mismatched arrays");
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const std::size_t i = bracket_index(xs, x);
    const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (1.0 - w) * ys[i] + w * ys[i + 1];
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t counter) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (counter + 1ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> solve_tridiagonal(const std::vector<double>& lo,
                                      const std::vector<double>& diag,
                                      const std::vector<double>& up,
                                      const std::vector<double>& d) {
    const std::size_t n = diag.size();
    if (lo.size() != n || up.size() != n || d.size() != n || n == 0)
        throw std::invalid_argument("solve_tridiagonal: mismatched arrays");
    std::vector<double> c(n), x(n);
    double beta = diag[0];
    if (beta == 0.0) throw numeric_error("solve_tridiagonal: zero pivot");
    x[0] = d[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        c[i] = up[i - 1] / beta;
        beta = diag[i] - lo[i] * c[i];
        if (beta == 0.0) throw numeric_error("solve_tridiagonal: zero pivot");
        x[i] = (d[i] - lo[i] * x[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i + 1] * x[i + 1];
    return x;
}

}  // namespace mmq
