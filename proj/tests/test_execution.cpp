#include "doctest.h"

#include <cmath>
#include <vector>

#include "mmq/common.hpp"
#include "mmq/execution.hpp"

using namespace mmq;

namespace {

FlowPath demo_flow(std::size_t n = 201) { return iid_flow(5, 10.0, 5.0, n, 1.0); }

double integral(const FlowPath& flow, const std::vector<double>& v) {
    return trapezoid(flow.times, v);
}

}  // namespace

TEST_CASE("strategies meet the liquidation constraint exactly") {
    const auto flow = demo_flow();
    for (auto kind : {StrategyKind::twap, StrategyKind::vwap, StrategyKind::exploit}) {
        const auto plan = make_strategy(kind, flow, 40.0);
        REQUIRE(plan.v.size() == flow.times.size());
        CHECK(integral(flow, plan.v) == doctest::Approx(-40.0).epsilon(1e-12));
        CHECK_NOTHROW(validate_plan(plan, flow));
        for (double r : plan.v) CHECK(r <= 1e-15);  // sell-only
    }
}

TEST_CASE("twap is flat, vwap tracks the background sell rate") {
    const auto flow = demo_flow();
    const auto twap = make_strategy(StrategyKind::twap, flow, 40.0);
    for (double r : twap.v) CHECK(r == doctest::Approx(-40.0).epsilon(1e-12));

    const auto vwap = make_strategy(StrategyKind::vwap, flow, 40.0);
    // v proportional to b: the ratio v/b must be constant.
    const double ratio = vwap.v[0] / flow.b[0];
    for (std::size_t i = 0; i < vwap.v.size(); ++i)
        CHECK(vwap.v[i] == doctest::Approx(ratio * flow.b[i]).epsilon(1e-11));
    CHECK(ratio < 0.0);
}

TEST_CASE("back-loaded schedule idles in the first half and doubles after") {
    const auto flow = demo_flow(201);  // odd count: node exactly at T/2
    const auto plan = make_strategy(StrategyKind::exploit, flow, 40.0);
    const std::size_t mid = 100;
    for (std::size_t i = 0; i < mid; ++i) CHECK(plan.v[i] == 0.0);
    CHECK(plan.v[mid] == doctest::Approx(-40.0).epsilon(1e-12));  // half rate on the seam
    for (std::size_t i = mid + 1; i < plan.v.size(); ++i)
        CHECK(plan.v[i] == doctest::Approx(-80.0).epsilon(1e-12));
    CHECK(integral(flow, plan.v) == doctest::Approx(-40.0).epsilon(1e-12));
}

TEST_CASE("validate_plan rejects misaligned or short plans") {
    const auto flow = demo_flow();
    auto plan = make_strategy(StrategyKind::twap, flow, 40.0);
    plan.v.pop_back();
    CHECK_THROWS_AS(validate_plan(plan, flow), std::invalid_argument);
    auto plan2 = make_strategy(StrategyKind::twap, flow, 40.0);
    plan2.v[5] += 1.0;  // breaks the liquidation constraint
    CHECK_THROWS_AS(validate_plan(plan2, flow), std::invalid_argument);
}

TEST_CASE("inactive plan has zero objective; zero-size construction is rejected") {
    const auto flow = demo_flow();
    const auto pen = constant_penalty(flow, 0.04, 0.04);
    const IntensityModel m = ExponentialIntensity{1.0};
    CHECK_THROWS_AS(make_strategy(StrategyKind::twap, flow, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_strategy(StrategyKind::twap, flow, -5.0), std::invalid_argument);
    // A hand-built all-zero schedule is still a valid degenerate plan and must
    // contribute nothing to the objective.
    ExecutionPlan plan;
    plan.kind = StrategyKind::twap;
    plan.v.assign(flow.times.size(), 0.0);
    plan.q0_exec = 0.0;
    CHECK_NOTHROW(validate_plan(plan, flow));
    QGrid tmpl{0.0, 0.0, 300, 2, 1.0};
    const double obj = evaluate_execution(plan, flow, pen, m, m, Truncation{30.0}, tmpl);
    CHECK(obj == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("selling into a balanced market yields a negative objective") {
    // The maker prices the imbalance the seller creates, so liquidation pays
    // away spread: -int v Y dt < 0 when the only imbalance is the seller's own.
    const auto flow = constant_flow(10.0, 10.0, 201, 1.0);
    const auto pen = constant_penalty(flow, 0.04, 0.04);
    const IntensityModel m = ExponentialIntensity{1.0};
    QGrid tmpl{0.0, 0.0, 300, 2, 1.0};
    const auto plan = make_strategy(StrategyKind::twap, flow, 20.0);
    const double obj = evaluate_execution(plan, flow, pen, m, m, Truncation{30.0}, tmpl);
    CHECK(obj < 0.0);
}

TEST_CASE("objective responds to the background imbalance direction") {
    // Strong selling pressure pushes the maker's adjoint negative, making the
    // seller's own flow cheaper to place than under buying pressure.
    const IntensityModel m = ExponentialIntensity{1.0};
    QGrid tmpl{0.0, 0.0, 300, 2, 1.0};
    const auto buy_bg = constant_flow(14.0, 6.0, 201, 1.0);   // buy imbalance
    const auto sell_bg = constant_flow(6.0, 14.0, 201, 1.0);  // sell imbalance
    const auto pen_b = constant_penalty(buy_bg, 0.04, 0.04);
    const auto pen_s = constant_penalty(sell_bg, 0.04, 0.04);
    const auto plan_b = make_strategy(StrategyKind::twap, buy_bg, 20.0);
    const auto plan_s = make_strategy(StrategyKind::twap, sell_bg, 20.0);
    const double obj_buy = evaluate_execution(plan_b, buy_bg, pen_b, m, m, Truncation{30.0}, tmpl);
    const double obj_sell =
        evaluate_execution(plan_s, sell_bg, pen_s, m, m, Truncation{30.0}, tmpl);
    CHECK(obj_buy > obj_sell);
}

TEST_CASE("experiment driver is deterministic in the master seed") {
    ExecExperimentParams p;
    p.n_trials = 3;
    p.seed = 42;
    p.n_grid = 101;
    p.n_q = 200;
    p.q0_exec = 20.0;
    p.imbalance = 10.0;
    const auto s1 = run_exec_experiment(p);
    const auto s2 = run_exec_experiment(p);
    REQUIRE(s1.trials.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(s1.trials[i].twap == s2.trials[i].twap);
        CHECK(s1.trials[i].vwap == s2.trials[i].vwap);
        CHECK(s1.trials[i].exploit_ == s2.trials[i].exploit_);
    }
    p.seed = 43;
    const auto s3 = run_exec_experiment(p);
    CHECK(s1.trials[0].twap != s3.trials[0].twap);
    // Means aggregate the trials.
    double acc = 0.0;
    for (const auto& t : s1.trials) acc += t.twap;
    CHECK(s1.mean_twap == doctest::Approx(acc / 3.0).epsilon(1e-14));
}

TEST_CASE("all three schedules produce finite distinct objectives") {
    ExecExperimentParams p;
    p.n_trials = 2;
    p.seed = 7;
    p.n_grid = 101;
    p.n_q = 200;
    const auto s = run_exec_experiment(p);
    for (const auto& t : s.trials) {
        CHECK(std::isfinite(t.twap));
        CHECK(std::isfinite(t.vwap));
        CHECK(std::isfinite(t.exploit_));
        CHECK(t.twap != t.vwap);
        CHECK(t.twap != t.exploit_);
    }
}
