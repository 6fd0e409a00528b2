#include "mmq/execution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmq/common.hpp"

namespace mmq {

ExecutionPlan make_strategy(StrategyKind kind, const FlowPath& flow, double q0_exec) {
    validate_flow(flow);
    if (!(q0_exec > 0.0))
        throw std::invalid_argument("make_strategy: q0_exec must be positive (sell liquidation)");

    const auto& t = flow.times;
    const double T = flow.T();
    ExecutionPlan plan;
    plan.kind = kind;
    plan.q0_exec = q0_exec;
    plan.v.assign(t.size(), 0.0);

    switch (kind) {
        case StrategyKind::twap:
            for (double& v : plan.v) v = -q0_exec / T;
            break;
        case StrategyKind::vwap: {
            const double int_b = trapezoid(t, flow.b);
            if (!(int_b > 0.0))
                throw std::invalid_argument("make_strategy: vwap needs positive selling volume");
            for (std::size_t i = 0; i < t.size(); ++i)
                plan.v[i] = -q0_exec * flow.b[i] / int_b;
            break;
        }
        case StrategyKind::exploit: {
            const double mid = t.front() + 0.5 * (T - t.front());
            const double eps = 1e-12 * std::max(1.0, T);
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (t[i] > mid + eps)
                    plan.v[i] = -2.0 * q0_exec / T;
                else if (std::abs(t[i] - mid) <= eps)
                    plan.v[i] = -q0_exec / T;  // keeps the trapezoid integral exact
            }
            break;
        }
    }

    // Snap the schedule onto the liquidation constraint regardless of grid.
    const double total = trapezoid(t, plan.v);
    if (!(total < 0.0)) throw std::invalid_argument("make_strategy: degenerate schedule");
    const double c = -q0_exec / total;
    for (double& v : plan.v) v *= c;
    validate_plan(plan, flow);
    return plan;
}

void validate_plan(const ExecutionPlan& plan, const FlowPath& flow) {
    if (plan.v.size() != flow.times.size())
        throw std::invalid_argument("execution plan must live on the background flow grid");
    const double total = trapezoid(flow.times, plan.v);
    if (std::abs(total + plan.q0_exec) > 1e-10)
        throw std::invalid_argument("execution plan violates the liquidation constraint");
}

double evaluate_execution(const ExecutionPlan& plan, const FlowPath& background,
                          const PenaltyPath& penalty, const IntensityModel& model_a,
                          const IntensityModel& model_b, const Truncation& trunc,
                          const QGrid& grid, double q0_mm) {
    validate_flow(background);
    validate_penalty(background, penalty);
    validate_plan(plan, background);

    FlowPath composite = background;
    for (std::size_t i = 0; i < composite.times.size(); ++i) {
        const double v = plan.v[i];
        if (v >= 0.0)
            composite.a[i] += v;
        else
            composite.b[i] -= v;
    }

    QGrid work = auto_qgrid(composite, penalty, model_a, model_b, trunc, q0_mm,
                            grid.n_q >= 3 ? grid.n_q : 400,
                            std::max<std::size_t>(grid.n_t, 2));
    for (int attempt = 0;; ++attempt) {
        try {
            const DecouplingField field =
                solve_decoupling_field(composite, penalty, model_a, model_b, trunc, work);
            const Trajectory traj = forward_trajectory(field, composite, penalty, model_a,
                                                       model_b, trunc, q0_mm);
            std::vector<double> integrand(traj.times.size());
            for (std::size_t i = 0; i < traj.times.size(); ++i)
                integrand[i] =
                    interp_linear(background.times, plan.v, traj.times[i]) * traj.Y[i];
            return -trapezoid(traj.times, integrand);
        } catch (const domain_exit_error&) {
            if (attempt >= 2) throw;
            const double mid = 0.5 * (work.q_min + work.q_max);
            const double half = work.q_max - work.q_min;
            work.q_min = mid - half;
            work.q_max = mid + half;
            work.n_t *= 2;
        }
    }
}

ExecSummary run_exec_experiment(const ExecExperimentParams& params) {
    if (params.n_trials < 1)
        throw std::invalid_argument("run_exec_experiment: need at least one trial");

    const IntensityModel model = ExponentialIntensity{params.gamma};
    ExecSummary summary;
    summary.trials.reserve(params.n_trials);

    for (std::size_t trial = 0; trial < params.n_trials; ++trial) {
        const std::uint64_t sub = mix_seed(params.seed, trial);
        FlowPath background = scale_to_imbalance(
            iid_flow(sub, params.flow_mean, params.flow_spread, params.n_grid, params.T),
            params.imbalance);
        const PenaltyPath penalty = constant_penalty(background, params.phi, params.A);
        const Truncation trunc =
            default_truncation(model, 2.0 * params.A * (params.q0_exec + params.imbalance) + 10.0);
        QGrid grid;
        grid.n_q = params.n_q;

        ExecTrial row;
        row.trial = trial;
        row.twap = evaluate_execution(make_strategy(StrategyKind::twap, background,
                                                    params.q0_exec),
                                      background, penalty, model, model, trunc, grid,
                                      params.q0_mm);
        row.vwap = evaluate_execution(make_strategy(StrategyKind::vwap, background,
                                                    params.q0_exec),
                                      background, penalty, model, model, trunc, grid,
                                      params.q0_mm);
        row.exploit_ = evaluate_execution(make_strategy(StrategyKind::exploit, background,
                                                        params.q0_exec),
                                          background, penalty, model, model, trunc, grid,
                                          params.q0_mm);
        summary.trials.push_back(row);
        summary.mean_twap += row.twap;
        summary.mean_vwap += row.vwap;
        summary.mean_exploit += row.exploit_;
    }
    const double n = static_cast<double>(params.n_trials);
    summary.mean_twap /= n;
    summary.mean_vwap /= n;
    summary.mean_exploit /= n;
    return summary;
}

}  // namespace mmq
