#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mmq {

// Deterministic order-flow rates on a uniform time grid.  a is the ask-side
// (market buy) rate, b the bid-side (market sell) rate; both nonnegative,
// strictly positive when produced by the constructors below.
struct FlowPath {
    std::vector<double> times;
    std::vector<double> a;
    std::vector<double> b;

    double T() const { return times.empty() ? 0.0 : times.back(); }
};

// Quadratic inventory penalties on the same grid: running weight phi(t) >= 0
// plus a terminal weight A >= 0.
struct PenaltyPath {
    std::vector<double> phi;
    double A_terminal = 0.0;
};

// Grid shape and monotonicity; entries nonnegative.  Constructors enforce
// strict positivity, but zero-rate paths built by hand stay usable so the
// one-sided experiments (b identically 0) can run.
void validate_flow(const FlowPath& path);
void validate_penalty(const FlowPath& path, const PenaltyPath& penalty);

FlowPath constant_flow(double rate_a, double rate_b, std::size_t n, double T);

// Rates drawn i.i.d. uniform on [mean-spread, mean+spread] and then frozen;
// reproducible from the seed.  Requires mean > spread so positivity holds.
FlowPath iid_flow(std::uint64_t seed, double mean, double spread, std::size_t n, double T);

PenaltyPath constant_penalty(const FlowPath& path, double phi, double A_terminal);

// (integral of a, integral of b) by the trapezoid rule.
std::pair<double, double> integrate_flow(const FlowPath& path);

// Rescales a so that 'integral a - integral b == target', leaving b alone.
// Throws std::invalid_argument when the required scale factor is <= 0.
FlowPath scale_to_imbalance(const FlowPath& path, double target);

// Bounded affine map l -> clamp(offset + slope*l, lo, hi) used to derive flow
// and penalty levels from the scalar factor.
struct LinkFunction {
    double offset = 0.0;
    double slope = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    double operator()(double l) const;
};

// One-dimensional Ornstein-Uhlenbeck factor plus the links that map its level
// into (a, b, phi, A).
struct OuFactor {
    double kappa = 0.0;  // mean-reversion speed
    double mean = 0.0;
    double vol = 0.0;
    double l0 = 0.0;
    LinkFunction link_a;
    LinkFunction link_b;
    LinkFunction link_phi;
    LinkFunction link_A;
};

void validate_factor(const OuFactor& factor);

struct FactorPathBundle {
    std::vector<double> times;
    std::vector<double> l;  // simulated factor levels
    FlowPath flow;          // induced a(l), b(l)
    PenaltyPath penalty;    // induced phi(l); A from the terminal level
};

// Euler-Maruyama simulation of dL = kappa*(mean-L)dt + vol*dW.
FactorPathBundle simulate_ou_factor(const OuFactor& factor, std::uint64_t seed,
                                    std::size_t n, double T);

// CSV persistence: metadata line "# A=<value>", header "t,a,b,phi", then one
// row per grid point.  Numbers are printed with round-trip precision so a
// write/read cycle is bit-exact.  Readers reject non-increasing t.
void write_flow_csv(std::ostream& os, const FlowPath& path, const PenaltyPath& penalty);
void write_flow_csv(const std::string& filename, const FlowPath& path, const PenaltyPath& penalty);
std::pair<FlowPath, PenaltyPath> read_flow_csv(std::istream& is);
std::pair<FlowPath, PenaltyPath> read_flow_csv(const std::string& filename);

}  // namespace mmq
