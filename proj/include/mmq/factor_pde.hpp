#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mmq/flow.hpp"

namespace mmq {

// Uniform (t, l) lattice for the factor-driven value coefficients.
struct FactorGrid {
    double l_min = 0.0;
    double l_max = 0.0;
    std::size_t n_l = 0;
    std::size_t n_t = 0;
    double T = 0.0;
};

// Quadratic value expansion vs inventory with factor-dependent coefficients:
// H(t, q, l) = h0(t,l) + h1(t,l) q + h2(t,l) q^2.  h1/h0 stay empty until
// solve_h1_h0_pde fills them.
struct HSurface {
    FactorGrid grid;
    std::vector<double> times;  // n_t
    std::vector<double> l;      // n_l
    std::vector<double> h2;     // row-major, [i_t * n_l + j_l]
    std::vector<double> h1;
    std::vector<double> h0;

    double h2_at(std::size_t i, std::size_t j) const { return h2[i * grid.n_l + j]; }
    double h1_at(std::size_t i, std::size_t j) const { return h1[i * grid.n_l + j]; }
    double h0_at(std::size_t i, std::size_t j) const { return h0[i * grid.n_l + j]; }
};

// Backward Crank-Nicolson solve of the quadratic-coefficient equation
//   dh2/dt + L h2 + gamma (a+b) h2^2 - phi = 0,   h2(T, l) = -A(l),
// with L the factor generator kappa(mean-l) d/dl + vol^2/2 d^2/dl^2 and
// a, b, phi, A read off the factor's link functions.  The quadratic term is
// handled by Picard iteration (sup-change <= 1e-10, at most 200 rounds).
// The solution band [-(max A + max phi * T), 0] is asserted at every accepted
// step with 1e-8 slack; violations raise numeric_error rather than clipping.
// theta = 1 switches to fully implicit stepping for rough data.
HSurface solve_h2_pde(const OuFactor& factor, const FactorGrid& grid, double gamma,
                      double theta = 0.5);

// Fills h1 and h0 on the same lattice:
//   dh1/dt + L h1 + zeta (b-a) h2 + gamma (a+b) h2 h1 = 0,        h1(T) = 0
//   dh0/dt + L h0 + zeta (b-a) h1
//          + (gamma b/4)(zeta/gamma - h1)^2
//          + (gamma a/4)(zeta/gamma + h1)^2 = 0,                  h0(T) = 0
// Both are linear given h2 (resp. h1), so each step is one tridiagonal solve.
HSurface solve_h1_h0_pde(const HSurface& h2_surface, const OuFactor& factor, double zeta,
                         double gamma, double theta = 0.5);

struct McParams {
    std::size_t n_paths = 1000;
    std::size_t n_steps = 50;  // time steps per unit of horizon
    std::uint64_t seed = 0;
};

struct FkResult {
    FactorGrid grid;
    std::vector<double> times;
    std::vector<double> l;
    std::vector<double> h2;        // fixed-point estimate, row-major
    std::vector<double> std_err;   // per-node Monte Carlo standard error
    std::size_t iterations = 0;
    double final_change = 0.0;
};

// Independent cross-check of solve_h2_pde: iterates the integral map
//   g <- E[ -A(L_T) e^{int_t^T gamma(a+b) g ds}
//           - int_t^T phi(L_s) e^{int_t^s gamma(a+b) g du} ds ]
// by OU Monte Carlo from every lattice node, interpolating g bilinearly.
// Common random numbers per node (counter-based seeds) keep the iteration
// deterministic; it stops once the sup-change drops under twice the largest
// standard error (floored at 1e-10).  Three consecutive sup-change increases
// raise numeric_error.
FkResult feynman_kac_fixed_point(const OuFactor& factor, double gamma, const McParams& mc,
                                 const FactorGrid& lattice);

struct QuoteSurfacePair {
    std::vector<double> delta_a;  // row-major over the HSurface lattice
    std::vector<double> delta_b;
};

// Feedback quotes at inventory q: delta_a = zeta/(2 gamma) + (h1 + 2 h2 q)/2,
// delta_b mirrors it; the two always sum to zeta/gamma.
QuoteSurfacePair quote_surface(const HSurface& h, double zeta, double gamma, double q);

// CSV rows "t,l,h2,h1,h0" over the lattice (zeros for missing h1/h0).
void write_h_surface_csv(std::ostream& os, const HSurface& h);

}  // namespace mmq
