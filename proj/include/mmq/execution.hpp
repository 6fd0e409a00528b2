#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mmq/fbsde_field.hpp"
#include "mmq/flow.hpp"
#include "mmq/intensity.hpp"

namespace mmq {

enum class StrategyKind { twap, vwap, exploit };

// A liquidation schedule on the background-flow grid: signed trading rate v
// (negative = sell) with full liquidation int v dt = -q0_exec.
struct ExecutionPlan {
    StrategyKind kind = StrategyKind::twap;
    std::vector<double> v;
    double q0_exec = 0.0;
};

// twap: constant rate.  vwap: proportional to the background selling rate b.
// exploit: idle on [0, T/2], double rate afterwards (the grid node at T/2
// carries the half rate so the trapezoid integral stays exact).  All plans
// are rescaled to meet the liquidation constraint to machine precision.
ExecutionPlan make_strategy(StrategyKind kind, const FlowPath& flow, double q0_exec);

// Checks grid alignment and the liquidation constraint (1e-10).
void validate_plan(const ExecutionPlan& plan, const FlowPath& flow);

// Objective of a sell-only plan against a quoting market maker: composes the
// flows (a = a~ + v+, b = b~ - v 1{v<0}), solves the maker's decoupling field
// and trajectory from q0_mm, and returns -int v Y dt.  The grid argument is a
// resolution template; the domain and time step are auto-sized per composite
// flow, as in impact_sweep.
double evaluate_execution(const ExecutionPlan& plan, const FlowPath& background,
                          const PenaltyPath& penalty, const IntensityModel& model_a,
                          const IntensityModel& model_b, const Truncation& trunc,
                          const QGrid& grid, double q0_mm = 0.0);

struct ExecExperimentParams {
    std::size_t n_trials = 100;
    std::uint64_t seed = 0;
    double gamma = 1.0;  // exponential intensity decay, both sides
    double T = 1.0;
    double phi = 0.04;
    double A = 0.04;
    double q0_mm = 0.0;
    double q0_exec = 40.0;
    double imbalance = 30.0;    // int a - int b of the background flows
    double flow_mean = 10.0;    // background rates ~ U[mean-spread, mean+spread]
    double flow_spread = 5.0;
    std::size_t n_grid = 201;   // background flow resolution
    std::size_t n_q = 400;      // field resolution template
};

struct ExecTrial {
    std::size_t trial = 0;
    double twap = 0.0;
    double vwap = 0.0;
    double exploit_ = 0.0;
};

struct ExecSummary {
    std::vector<ExecTrial> trials;
    double mean_twap = 0.0;
    double mean_vwap = 0.0;
    double mean_exploit = 0.0;
};

// Seeded comparison of the three schedules over freshly drawn background
// flows, each rescaled to the target imbalance.  Deterministic in the master
// seed (per-trial substreams).
ExecSummary run_exec_experiment(const ExecExperimentParams& params);

}  // namespace mmq
