#include "mmq/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mmq/common.hpp"

namespace mmq {

void validate_flow(const FlowPath& path) {
    const std::size_t n = path.times.size();
    if (n < 2) throw std::invalid_argument("flow path needs at least two grid points");
    if (path.a.size() != n || path.b.size() != n)
        throw std::invalid_argument("flow path arrays must share one length");
    for (std::size_t i = 1; i < n; ++i)
        if (!(path.times[i] > path.times[i - 1]))
            throw std::invalid_argument("flow time grid must be strictly increasing");
    for (std::size_t i = 0; i < n; ++i)
        if (!(path.a[i] >= 0.0) || !(path.b[i] >= 0.0))
            throw std::invalid_argument("flow rates must be nonnegative");
}

void validate_penalty(const FlowPath& path, const PenaltyPath& penalty) {
    if (penalty.phi.size() != path.times.size())
        throw std::invalid_argument("penalty grid must match the flow grid");
    for (double p : penalty.phi)
        if (!(p >= 0.0)) throw std::invalid_argument("running penalty must be nonnegative");
    if (!(penalty.A_terminal >= 0.0))
        throw std::invalid_argument("terminal penalty must be nonnegative");
}

FlowPath constant_flow(double rate_a, double rate_b, std::size_t n, double T) {
    if (!(rate_a > 0.0) || !(rate_b > 0.0))
        throw std::invalid_argument("constant_flow requires strictly positive rates");
    if (n < 2) throw std::invalid_argument("constant_flow requires n >= 2");
    if (!(T > 0.0)) throw std::invalid_argument("constant_flow requires T > 0");
    FlowPath path;
    path.times = uniform_grid(0.0, T, n);
    path.a.assign(n, rate_a);
    path.b.assign(n, rate_b);
    return path;
}

FlowPath iid_flow(std::uint64_t seed, double mean, double spread, std::size_t n, double T) {
    if (!(spread >= 0.0) || !(mean > spread))
        throw std::invalid_argument("iid_flow requires mean > spread >= 0");
    if (n < 2) throw std::invalid_argument("iid_flow requires n >= 2");
    if (!(T > 0.0)) throw std::invalid_argument("iid_flow requires T > 0");
    FlowPath path;
    path.times = uniform_grid(0.0, T, n);
    path.a.resize(n);
    path.b.resize(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(mean - spread, mean + spread);
    for (std::size_t i = 0; i < n; ++i) path.a[i] = dist(rng);
    for (std::size_t i = 0; i < n; ++i) path.b[i] = dist(rng);
    return path;
}

PenaltyPath constant_penalty(const FlowPath& path, double phi, double A_terminal) {
    PenaltyPath penalty;
    penalty.phi.assign(path.times.size(), phi);
    penalty.A_terminal = A_terminal;
    validate_penalty(path, penalty);
    return penalty;
}

std::pair<double, double> integrate_flow(const FlowPath& path) {
    return {trapezoid(path.times, path.a), trapezoid(path.times, path.b)};
}

FlowPath scale_to_imbalance(const FlowPath& path, double target) {
    validate_flow(path);
    const auto [int_a, int_b] = integrate_flow(path);
    if (!(int_a > 0.0))
        throw std::invalid_argument("scale_to_imbalance needs a path with positive buy volume");
    const double c = (target + int_b) / int_a;
    if (!(c > 0.0)) {
        std::ostringstream msg;
        msg << "scale_to_imbalance: target " << target << " infeasible (scale " << c << " <= 0)";
        throw std::invalid_argument(msg.str());
    }
    FlowPath scaled = path;
    for (double& v : scaled.a) v *= c;
    return scaled;
}

double LinkFunction::operator()(double l) const {
    return std::clamp(offset + slope * l, lo, hi);
}

void validate_factor(const OuFactor& factor) {
    if (!(factor.kappa >= 0.0)) throw std::invalid_argument("factor kappa must be >= 0");
    if (!(factor.vol >= 0.0)) throw std::invalid_argument("factor vol must be >= 0");
    for (const LinkFunction* link : {&factor.link_a, &factor.link_b, &factor.link_phi, &factor.link_A}) {
        if (!(link->lo <= link->hi)) throw std::invalid_argument("link bounds must satisfy lo <= hi");
        if (!(link->lo >= 0.0)) throw std::invalid_argument("link lower bound must be >= 0");
    }
}

FactorPathBundle simulate_ou_factor(const OuFactor& factor, std::uint64_t seed,
                                    std::size_t n, double T) {
    validate_factor(factor);
    if (n < 2) throw std::invalid_argument("simulate_ou_factor requires n >= 2");
    if (!(T > 0.0)) throw std::invalid_argument("simulate_ou_factor requires T > 0");

    FactorPathBundle bundle;
    bundle.times = uniform_grid(0.0, T, n);
    bundle.l.resize(n);
    bundle.l[0] = factor.l0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double dt = bundle.times[i] - bundle.times[i - 1];
        const double prev = bundle.l[i - 1];
        bundle.l[i] = prev + factor.kappa * (factor.mean - prev) * dt +
                      factor.vol * std::sqrt(dt) * gauss(rng);
    }

    bundle.flow.times = bundle.times;
    bundle.flow.a.resize(n);
    bundle.flow.b.resize(n);
    bundle.penalty.phi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        bundle.flow.a[i] = factor.link_a(bundle.l[i]);
        bundle.flow.b[i] = factor.link_b(bundle.l[i]);
        bundle.penalty.phi[i] = factor.link_phi(bundle.l[i]);
    }
    bundle.penalty.A_terminal = factor.link_A(bundle.l.back());
    return bundle;
}

void write_flow_csv(std::ostream& os, const FlowPath& path, const PenaltyPath& penalty) {
    validate_flow(path);
    validate_penalty(path, penalty);
    os << "# A=" << format_g17(penalty.A_terminal) << "\n";
    os << "t,a,b,phi\n";
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        os << format_g17(path.times[i]) << ',' << format_g17(path.a[i]) << ','
           << format_g17(path.b[i]) << ',' << format_g17(penalty.phi[i]) << "\n";
    }
}

void write_flow_csv(const std::string& filename, const FlowPath& path, const PenaltyPath& penalty) {
    std::ofstream os(filename);
    if (!os) throw std::invalid_argument("cannot open " + filename + " for writing");
    write_flow_csv(os, path, penalty);
}

std::pair<FlowPath, PenaltyPath> read_flow_csv(std::istream& is) {
    FlowPath path;
    PenaltyPath penalty;
    std::string line;
    bool saw_header = false;
    bool saw_meta = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("A=");
            if (pos != std::string::npos) {
                penalty.A_terminal = std::stod(line.substr(pos + 2));
                saw_meta = true;
            }
            continue;
        }
        if (!saw_header) {
            if (line != "t,a,b,phi")
                throw std::invalid_argument("flow csv: unexpected header '" + line + "'");
            saw_header = true;
            continue;
        }
        std::istringstream row(line);
        double vals[4];
        char comma;
        for (int k = 0; k < 4; ++k) {
            if (!(row >> vals[k])) throw std::invalid_argument("flow csv: malformed row '" + line + "'");
            if (k < 3 && !(row >> comma && comma == ','))
                throw std::invalid_argument("flow csv: malformed row '" + line + "'");
        }
        if (!path.times.empty() && !(vals[0] > path.times.back()))
            throw std::invalid_argument("flow csv: time column must be strictly increasing");
        path.times.push_back(vals[0]);
        path.a.push_back(vals[1]);
        path.b.push_back(vals[2]);
        penalty.phi.push_back(vals[3]);
    }
    if (!saw_header) throw std::invalid_argument("flow csv: missing header");
    if (!saw_meta) throw std::invalid_argument("flow csv: missing '# A=' metadata line");
    validate_flow(path);
    validate_penalty(path, penalty);
    return {std::move(path), std::move(penalty)};
}

std::pair<FlowPath, PenaltyPath> read_flow_csv(const std::string& filename) {
    std::ifstream is(filename);
    if (!is) throw std::invalid_argument("cannot open " + filename + " for reading");
    return read_flow_csv(is);
}

}  // namespace mmq
