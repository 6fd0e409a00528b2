#include "mmq/factor_pde.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mmq/common.hpp"

namespace mmq {

namespace {

void check_grid(const FactorGrid& grid) {
    if (!(grid.l_min < grid.l_max)) throw std::invalid_argument("factor grid: l_min must be < l_max");
    if (grid.n_l < 3) throw std::invalid_argument("factor grid: need n_l >= 3");
    if (grid.n_t < 2) throw std::invalid_argument("factor grid: need n_t >= 2");
    if (!(grid.T > 0.0)) throw std::invalid_argument("factor grid: need T > 0");
}

// Tridiagonal stencil of the factor generator kappa(mean-l) d/dl +
// vol^2/2 d^2/dl^2.  Boundary rows switch to one-sided convection, which is
// what zero-second-derivative extrapolation of the neighbour produces.
struct Generator {
    std::vector<double> lo, diag, up;

    void apply(const std::vector<double>& w, std::vector<double>& out) const {
        const std::size_t n = diag.size();
        out[0] = diag[0] * w[0] + up[0] * w[1];
        for (std::size_t j = 1; j + 1 < n; ++j)
            out[j] = lo[j] * w[j - 1] + diag[j] * w[j] + up[j] * w[j + 1];
        out[n - 1] = lo[n - 1] * w[n - 2] + diag[n - 1] * w[n - 1];
    }
};

Generator build_generator(const OuFactor& factor, const std::vector<double>& l) {
    const std::size_t n = l.size();
    const double dl = l[1] - l[0];
    const double diff = 0.5 * factor.vol * factor.vol / (dl * dl);
    Generator g;
    g.lo.assign(n, 0.0);
    g.diag.assign(n, 0.0);
    g.up.assign(n, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double conv = factor.kappa * (factor.mean - l[j]);
        g.lo[j] = -conv / (2.0 * dl) + diff;
        g.diag[j] = -2.0 * diff;
        g.up[j] = conv / (2.0 * dl) + diff;
    }
    const double conv0 = factor.kappa * (factor.mean - l.front());
    g.diag[0] = -conv0 / dl;
    g.up[0] = conv0 / dl;
    const double convN = factor.kappa * (factor.mean - l.back());
    g.lo[n - 1] = -convN / dl;
    g.diag[n - 1] = convN / dl;
    return g;
}

struct NodeCoeffs {
    std::vector<double> a, b, phi, A;
};

NodeCoeffs link_values(const OuFactor& factor, const std::vector<double>& l) {
    NodeCoeffs c;
    const std::size_t n = l.size();
    c.a.resize(n);
    c.b.resize(n);
    c.phi.resize(n);
    c.A.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        c.a[j] = factor.link_a(l[j]);
        c.b[j] = factor.link_b(l[j]);
        c.phi[j] = factor.link_phi(l[j]);
        c.A[j] = factor.link_A(l[j]);
    }
    return c;
}

void check_theta(double theta) {
    if (!(theta >= 0.5) || !(theta <= 1.0))
        throw std::invalid_argument("time-stepping theta must lie in [0.5, 1]");
}

}  // namespace

HSurface solve_h2_pde(const OuFactor& factor, const FactorGrid& grid, double gamma,
                      double theta) {
    check_grid(grid);
    validate_factor(factor);
    check_theta(theta);
    if (!(gamma > 0.0)) throw std::invalid_argument("solve_h2_pde: gamma must be positive");

    HSurface s;
    s.grid = grid;
    s.times = uniform_grid(0.0, grid.T, grid.n_t);
    s.l = uniform_grid(grid.l_min, grid.l_max, grid.n_l);
    s.h2.assign(grid.n_t * grid.n_l, 0.0);

    const Generator gen = build_generator(factor, s.l);
    const NodeCoeffs c = link_values(factor, s.l);
    const std::size_t n = grid.n_l;

    double a_bar = 0.0, phi_bar = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        a_bar = std::max(a_bar, c.A[j]);
        phi_bar = std::max(phi_bar, c.phi[j]);
    }
    const double band_lo = -(a_bar + phi_bar * grid.T) - 1e-8;
    const double band_hi = 1e-8;

    for (std::size_t j = 0; j < n; ++j) s.h2[(grid.n_t - 1) * n + j] = -c.A[j];

    std::vector<double> Lw(n), rhs(n), v(n), v_new(n);
    std::vector<double> mlo(n), mdiag(n), mup(n);
    for (std::size_t i = grid.n_t - 1; i > 0; --i) {
        const double dt = s.times[i] - s.times[i - 1];
        const double* w = s.h2.data() + i * n;
        std::vector<double> wv(w, w + n);
        gen.apply(wv, Lw);
        for (std::size_t j = 0; j < n; ++j) {
            const double cc = gamma * (c.a[j] + c.b[j]);
            const double Gw = Lw[j] + cc * wv[j] * wv[j] - c.phi[j];
            rhs[j] = wv[j] + dt * (1.0 - theta) * Gw - dt * theta * c.phi[j];
        }
        v = wv;
        bool converged = false;
        for (int picard = 0; picard < 200; ++picard) {
            for (std::size_t j = 0; j < n; ++j) {
                const double cc = gamma * (c.a[j] + c.b[j]);
                mlo[j] = -dt * theta * gen.lo[j];
                mdiag[j] = 1.0 - dt * theta * (gen.diag[j] + cc * v[j]);
                mup[j] = -dt * theta * gen.up[j];
            }
            v_new = solve_tridiagonal(mlo, mdiag, mup, rhs);
            double change = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                change = std::max(change, std::abs(v_new[j] - v[j]));
            v.swap(v_new);
            if (change <= 1e-10) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw numeric_error("solve_h2_pde: picard iteration did not converge in 200 rounds");
        for (std::size_t j = 0; j < n; ++j) {
            if (v[j] < band_lo || v[j] > band_hi) {
                std::ostringstream msg;
                msg << "solve_h2_pde: band violation at t = " << s.times[i - 1]
                    << ", l = " << s.l[j] << ": h2 = " << v[j];
                throw numeric_error(msg.str());
            }
            s.h2[(i - 1) * n + j] = v[j];
        }
    }
    return s;
}

HSurface solve_h1_h0_pde(const HSurface& h2_surface, const OuFactor& factor, double zeta,
                         double gamma, double theta) {
    check_grid(h2_surface.grid);
    validate_factor(factor);
    check_theta(theta);
    if (!(zeta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("solve_h1_h0_pde: zeta and gamma must be positive");
    if (h2_surface.h2.size() != h2_surface.grid.n_t * h2_surface.grid.n_l)
        throw std::invalid_argument("solve_h1_h0_pde: h2 surface not solved");

    HSurface s = h2_surface;
    const std::size_t n = s.grid.n_l;
    const std::size_t n_t = s.grid.n_t;
    s.h1.assign(n_t * n, 0.0);
    s.h0.assign(n_t * n, 0.0);

    const Generator gen = build_generator(factor, s.l);
    const NodeCoeffs c = link_values(factor, s.l);

    std::vector<double> Lw(n), rhs(n), v(n);
    std::vector<double> mlo(n), mdiag(n), mup(n);

    // h1 sweep: linear equation with reaction gamma(a+b)h2 and source
    // zeta(b-a)h2.
    for (std::size_t i = n_t - 1; i > 0; --i) {
        const double dt = s.times[i] - s.times[i - 1];
        std::vector<double> wv(s.h1.begin() + i * n, s.h1.begin() + (i + 1) * n);
        gen.apply(wv, Lw);
        for (std::size_t j = 0; j < n; ++j) {
            const double cc = gamma * (c.a[j] + c.b[j]);
            const double src_next = zeta * (c.b[j] - c.a[j]) * s.h2_at(i, j);
            const double src_here = zeta * (c.b[j] - c.a[j]) * s.h2_at(i - 1, j);
            const double Gw = Lw[j] + cc * s.h2_at(i, j) * wv[j] + src_next;
            rhs[j] = wv[j] + dt * (1.0 - theta) * Gw + dt * theta * src_here;
            mlo[j] = -dt * theta * gen.lo[j];
            mdiag[j] = 1.0 - dt * theta * (gen.diag[j] + cc * s.h2_at(i - 1, j));
            mup[j] = -dt * theta * gen.up[j];
        }
        v = solve_tridiagonal(mlo, mdiag, mup, rhs);
        std::copy(v.begin(), v.end(), s.h1.begin() + (i - 1) * n);
    }

    // h0 sweep: pure source equation once h1 is known.
    auto h0_source = [&](std::size_t i, std::size_t j) {
        const double h1v = s.h1_at(i, j);
        const double up = zeta / gamma - h1v;
        const double dn = zeta / gamma + h1v;
        return zeta * (c.b[j] - c.a[j]) * h1v +
               0.25 * gamma * (c.b[j] * up * up + c.a[j] * dn * dn);
    };
    for (std::size_t i = n_t - 1; i > 0; --i) {
        const double dt = s.times[i] - s.times[i - 1];
        std::vector<double> wv(s.h0.begin() + i * n, s.h0.begin() + (i + 1) * n);
        gen.apply(wv, Lw);
        for (std::size_t j = 0; j < n; ++j) {
            rhs[j] = wv[j] + dt * (1.0 - theta) * (Lw[j] + h0_source(i, j)) +
                     dt * theta * h0_source(i - 1, j);
            mlo[j] = -dt * theta * gen.lo[j];
            mdiag[j] = 1.0 - dt * theta * gen.diag[j];
            mup[j] = -dt * theta * gen.up[j];
        }
        v = solve_tridiagonal(mlo, mdiag, mup, rhs);
        std::copy(v.begin(), v.end(), s.h0.begin() + (i - 1) * n);
    }
    return s;
}

FkResult feynman_kac_fixed_point(const OuFactor& factor, double gamma, const McParams& mc,
                                 const FactorGrid& lattice) {
    validate_factor(factor);
    if (!(gamma > 0.0)) throw std::invalid_argument("feynman_kac: gamma must be positive");
    if (mc.n_paths < 100) throw std::invalid_argument("feynman_kac: need at least 100 paths");
    if (mc.n_steps < 1) throw std::invalid_argument("feynman_kac: need at least 1 step");
    if (lattice.n_l < 2 || lattice.n_t < 2 || !(lattice.l_min < lattice.l_max) ||
        !(lattice.T > 0.0))
        throw std::invalid_argument("feynman_kac: malformed lattice");

    FkResult res;
    res.grid = lattice;
    res.times = uniform_grid(0.0, lattice.T, lattice.n_t);
    res.l = uniform_grid(lattice.l_min, lattice.l_max, lattice.n_l);
    const std::size_t n_nodes = lattice.n_t * lattice.n_l;
    res.h2.assign(n_nodes, 0.0);
    res.std_err.assign(n_nodes, 0.0);

    std::vector<double> g(n_nodes, 0.0);
    auto g_at = [&](double t, double lv) {
        const double tc = std::clamp(t, res.times.front(), res.times.back());
        const double lc = std::clamp(lv, res.l.front(), res.l.back());
        const std::size_t i = bracket_index(res.times, tc);
        const std::size_t j = bracket_index(res.l, lc);
        const double wt = (tc - res.times[i]) / (res.times[i + 1] - res.times[i]);
        const double wl = (lc - res.l[j]) / (res.l[j + 1] - res.l[j]);
        const double lo = (1.0 - wl) * g[i * lattice.n_l + j] + wl * g[i * lattice.n_l + j + 1];
        const double hi = (1.0 - wl) * g[(i + 1) * lattice.n_l + j] +
                          wl * g[(i + 1) * lattice.n_l + j + 1];
        return (1.0 - wt) * lo + wt * hi;
    };

    std::vector<double> g_new(n_nodes, 0.0);
    double prev_change = 0.0;
    int rising = 0;
    for (std::size_t iter = 0; iter < 100; ++iter) {
        double max_se = 0.0;
        for (std::size_t i = 0; i < lattice.n_t; ++i) {
            const double t0 = res.times[i];
            const double remain = lattice.T - t0;
            for (std::size_t j = 0; j < lattice.n_l; ++j) {
                const std::size_t node = i * lattice.n_l + j;
                if (remain <= 0.0) {
                    g_new[node] = -factor.link_A(res.l[j]);
                    res.std_err[node] = 0.0;
                    continue;
                }
                const std::size_t m = std::max<std::size_t>(
                    1, static_cast<std::size_t>(
                           std::ceil(static_cast<double>(mc.n_steps) * remain / lattice.T)));
                const double ds = remain / static_cast<double>(m);
                const double sq_ds = std::sqrt(ds);
                // Common random numbers: the node seed never changes, so the
                // iteration behaves like a deterministic map.
                std::mt19937_64 rng(mix_seed(mc.seed, node));
                std::normal_distribution<double> gauss(0.0, 1.0);
                double sum = 0.0, sumsq = 0.0;
                for (std::size_t p = 0; p < mc.n_paths; ++p) {
                    double L = res.l[j];
                    double r_prev = gamma * (factor.link_a(L) + factor.link_b(L)) * g_at(t0, L);
                    double phi_prev = factor.link_phi(L);
                    double I = 0.0, eI_prev = 1.0, phi_int = 0.0;
                    for (std::size_t k = 1; k <= m; ++k) {
                        L += factor.kappa * (factor.mean - L) * ds +
                             factor.vol * sq_ds * gauss(rng);
                        const double sk = t0 + ds * static_cast<double>(k);
                        const double r_k =
                            gamma * (factor.link_a(L) + factor.link_b(L)) * g_at(sk, L);
                        I += 0.5 * (r_prev + r_k) * ds;
                        const double eI = std::exp(I);
                        const double phi_k = factor.link_phi(L);
                        phi_int += 0.5 * (phi_prev * eI_prev + phi_k * eI) * ds;
                        r_prev = r_k;
                        phi_prev = phi_k;
                        eI_prev = eI;
                    }
                    const double val = -factor.link_A(L) * eI_prev - phi_int;
                    sum += val;
                    sumsq += val * val;
                }
                const double np = static_cast<double>(mc.n_paths);
                const double mean = sum / np;
                const double var = std::max(0.0, (sumsq - np * mean * mean) / (np - 1.0));
                g_new[node] = mean;
                res.std_err[node] = std::sqrt(var / np);
                max_se = std::max(max_se, res.std_err[node]);
            }
        }
        double change = 0.0;
        for (std::size_t k = 0; k < n_nodes; ++k)
            change = std::max(change, std::abs(g_new[k] - g[k]));
        g = g_new;
        res.iterations = iter + 1;
        res.final_change = change;
        if (change <= std::max(2.0 * max_se, 1e-10)) {
            res.h2 = g;
            return res;
        }
        if (iter > 0 && change > prev_change) {
            if (++rising >= 3)
                throw numeric_error("feynman_kac: sup-change increased three times in a row");
        } else {
            rising = 0;
        }
        prev_change = change;
    }
    throw numeric_error("feynman_kac: fixed point not reached within 100 iterations");
}

QuoteSurfacePair quote_surface(const HSurface& h, double zeta, double gamma, double q) {
    if (!(zeta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("quote_surface: zeta and gamma must be positive");
    const std::size_t n = h.h2.size();
    QuoteSurfacePair out;
    out.delta_a.resize(n);
    out.delta_b.resize(n);
    const double half_spread = 0.5 * zeta / gamma;
    for (std::size_t k = 0; k < n; ++k) {
        const double h1v = h.h1.empty() ? 0.0 : h.h1[k];
        const double grad = h1v + 2.0 * h.h2[k] * q;
        out.delta_a[k] = half_spread + 0.5 * grad;
        out.delta_b[k] = half_spread - 0.5 * grad;
    }
    return out;
}

void write_h_surface_csv(std::ostream& os, const HSurface& h) {
    os << "t,l,h2,h1,h0\n";
    for (std::size_t i = 0; i < h.grid.n_t; ++i)
        for (std::size_t j = 0; j < h.grid.n_l; ++j) {
            const std::size_t k = i * h.grid.n_l + j;
            os << format_g17(h.times[i]) << ',' << format_g17(h.l[j]) << ','
               << format_g17(h.h2[k]) << ',' << format_g17(h.h1.empty() ? 0.0 : h.h1[k]) << ','
               << format_g17(h.h0.empty() ? 0.0 : h.h0[k]) << "\n";
        }
}

}  // namespace mmq
