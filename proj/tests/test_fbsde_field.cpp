#include "doctest.h"

#include <cmath>
#include <utility>
#include <vector>

#include "mmq/common.hpp"
#include "mmq/fbsde_field.hpp"

using namespace mmq;

namespace {

struct Setup {
    FlowPath flow;
    PenaltyPath penalty;
    IntensityModel model = ExponentialIntensity{1.0};
    Truncation trunc{30.0};
};

Setup one_sided(double rate, double A, std::size_t n, double T) {
    Setup s;
    s.flow.times = uniform_grid(0.0, T, n);
    s.flow.a.assign(n, rate);
    s.flow.b.assign(n, 0.0);
    s.penalty.phi.assign(n, 0.0);
    s.penalty.A_terminal = A;
    return s;
}

}  // namespace

TEST_CASE("terminal slice of the decoupling field is exact") {
    const auto flow = constant_flow(10.0, 10.0, 201, 1.0);
    const auto pen = constant_penalty(flow, 0.04, 0.05);
    const IntensityModel m = ExponentialIntensity{1.0};
    QGrid g{-5.0, 5.0, 201, 801, 1.0};
    const auto field = solve_decoupling_field(flow, pen, m, m, Truncation{30.0}, g);
    for (std::size_t j = 0; j < g.n_q; ++j)
        CHECK(field.value(g.n_t - 1, j) == doctest::Approx(-2.0 * 0.05 * field.q[j]).epsilon(1e-14));
}

TEST_CASE("field slices are nonincreasing in inventory") {
    const auto flow = constant_flow(12.0, 8.0, 201, 1.0);
    const auto pen = constant_penalty(flow, 0.04, 0.05);
    const IntensityModel m = ExponentialIntensity{1.0};
    QGrid g{-6.0, 6.0, 241, 801, 1.0};
    const auto field = solve_decoupling_field(flow, pen, m, m, Truncation{30.0}, g);
    for (std::size_t i = 0; i < g.n_t; i += 80)
        for (std::size_t j = 0; j + 1 < g.n_q; ++j)
            CHECK(field.value(i, j + 1) <= field.value(i, j) + 1e-10);
}

TEST_CASE("one-sided exponential run hits the frozen implicit-root values") {
    // Terminal inventory for total one-sided volume x solves
    // y + x*exp(2 gamma A y - 1) = q0; references frozen from an independent
    // Newton iteration.
    const double A = 0.05;
    struct Case {
        double rate, qT;
    };
    const Case cases[] = {
        {5.0, -1.57184951483814},
        {10.0, -2.784645427610738},
        {20.0, -4.630555133655488},
    };
    for (const auto& c : cases) {
        auto s = one_sided(c.rate, A, 401, 1.0);
        const double span = std::abs(c.qT) * 2.0 + 3.0;
        QGrid g{-span, span, 801, 1601, 1.0};
        const auto field = solve_decoupling_field(s.flow, s.penalty, s.model, s.model, s.trunc, g);
        const auto traj =
            forward_trajectory(field, s.flow, s.penalty, s.model, s.model, s.trunc, 0.0);
        CHECK(traj.Q.back() == doctest::Approx(c.qT).epsilon(5e-4));
        CHECK(traj.delta_a.back() ==
              doctest::Approx(1.0 - 2.0 * A * c.qT).epsilon(5e-4));
        // Adjoint terminal condition.
        CHECK(traj.Y.back() == doctest::Approx(-2.0 * A * traj.Q.back()).epsilon(1e-9));
    }
}

TEST_CASE("grid refinement roughly halves the terminal-inventory error") {
    auto run = [](std::size_t n_q, std::size_t n_t) {
        auto s = one_sided(10.0, 0.05, 401, 1.0);
        QGrid g{-8.0, 8.0, n_q, n_t, 1.0};
        const auto field = solve_decoupling_field(s.flow, s.penalty, s.model, s.model, s.trunc, g);
        return forward_trajectory(field, s.flow, s.penalty, s.model, s.model, s.trunc, 0.0)
            .Q.back();
    };
    const double ref = -2.784645427610738;
    const double e1 = std::abs(run(201, 401) - ref);
    const double e2 = std::abs(run(401, 801) - ref);
    CHECK(e2 < 0.75 * e1);  // first-order scheme: expect ~0.5
    CHECK(e2 < 2e-3);
}

TEST_CASE("symmetric flow gives an odd field and a flat trajectory at zero") {
    const auto flow = constant_flow(9.0, 9.0, 201, 1.0);
    const auto pen = constant_penalty(flow, 0.03, 0.04);
    const IntensityModel m = ExponentialIntensity{1.5};
    QGrid g{-4.0, 4.0, 201, 801, 1.0};
    const auto field = solve_decoupling_field(flow, pen, m, m, Truncation{40.0}, g);
    // u(t, -q) = -u(t, q) when both sides are statistically identical.
    for (std::size_t i = 0; i < g.n_t; i += 100)
        for (std::size_t j = 0; j < g.n_q; j += 10) {
            const double left = field.value(i, j);
            const double right = field.value(i, g.n_q - 1 - j);
            CHECK(left == doctest::Approx(-right).epsilon(1e-9));
        }
    const auto traj = forward_trajectory(field, flow, pen, m, m, Truncation{40.0}, 0.0);
    for (double qv : traj.Q) CHECK(std::abs(qv) < 1e-9);
}

TEST_CASE("bilinear interpolation reproduces lattice nodes and clamps outside") {
    auto s = one_sided(10.0, 0.05, 101, 1.0);
    QGrid g{-6.0, 6.0, 121, 401, 1.0};
    const auto field = solve_decoupling_field(s.flow, s.penalty, s.model, s.model, s.trunc, g);
    CHECK(field.at(field.times[100], field.q[30]) ==
          doctest::Approx(field.value(100, 30)).epsilon(1e-13));
    // Midpoint between two nodes at a fixed time slice: average of neighbours.
    const double tmid = field.times[200];
    const double qmid = 0.5 * (field.q[40] + field.q[41]);
    CHECK(field.at(tmid, qmid) ==
          doctest::Approx(0.5 * (field.value(200, 40) + field.value(200, 41))).epsilon(1e-12));
    // Clamped beyond the hull.
    CHECK(field.at(0.5, 99.0) == doctest::Approx(field.at(0.5, 6.0)));
    CHECK(field.at(-1.0, 0.3) == doctest::Approx(field.at(0.0, 0.3)));
}

TEST_CASE("insufficient time resolution raises a CFL error with a usable hint") {
    auto s = one_sided(10.0, 0.05, 101, 1.0);
    QGrid g{-6.0, 6.0, 2001, 51, 1.0};  // fine in q, far too coarse in t
    try {
        solve_decoupling_field(s.flow, s.penalty, s.model, s.model, s.trunc, g);
        FAIL("expected cfl_error");
    } catch (const cfl_error& e) {
        QGrid g2 = g;
        g2.n_t = e.suggested_n_t;
        CHECK_NOTHROW(solve_decoupling_field(s.flow, s.penalty, s.model, s.model, s.trunc, g2));
    }
}

TEST_CASE("trajectories leaving the lattice raise domain_exit_error") {
    auto s = one_sided(20.0, 0.05, 201, 1.0);
    QGrid g{-1.0, 1.0, 41, 2001, 1.0};  // drift pushes Q to ~-4.6
    const auto field = solve_decoupling_field(s.flow, s.penalty, s.model, s.model, s.trunc, g);
    CHECK_THROWS_AS(
        forward_trajectory(field, s.flow, s.penalty, s.model, s.model, s.trunc, 0.0),
        domain_exit_error);
}

TEST_CASE("auto_qgrid produces a stable, wide-enough lattice") {
    auto s = one_sided(20.0, 0.05, 201, 1.0);
    const auto g = auto_qgrid(s.flow, s.penalty, s.model, s.model, s.trunc, 0.0, 801);
    CHECK(g.q_min < -4.7);  // terminal inventory is ~-4.63
    CHECK(g.q_max > 0.0);
    CHECK(g.n_t >= 401);
    const auto field = solve_decoupling_field(s.flow, s.penalty, s.model, s.model, s.trunc, g);
    const auto traj = forward_trajectory(field, s.flow, s.penalty, s.model, s.model, s.trunc, 0.0);
    CHECK(traj.Q.back() == doctest::Approx(-4.630555133655488).epsilon(2e-3));
}

TEST_CASE("impact sweep is sorted, monotone, and anchored at zero imbalance") {
    const auto base = constant_flow(10.0, 10.0, 201, 1.0);
    const auto pen = constant_penalty(base, 0.02, 0.02);
    const IntensityModel m = ExponentialIntensity{1.0};
    const Truncation tr{30.0};
    QGrid tmpl{0.0, 0.0, 400, 2, 1.0};
    const std::vector<double> targets{10.0, 0.0, 5.0, 20.0};
    const auto pts = impact_sweep(base, pen, m, m, tr, tmpl, targets, 0.0);
    REQUIRE(pts.size() == 4);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        CHECK(pts[i].imbalance < pts[i + 1].imbalance);
        CHECK(pts[i + 1].delta_a_T > pts[i].delta_a_T);
        CHECK(pts[i + 1].Q_T < pts[i].Q_T);
    }
    // Balanced flow: no net drift, delta_a_T = 1/gamma exactly.
    CHECK(pts[0].imbalance == doctest::Approx(0.0));
    CHECK(pts[0].delta_a_T == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(pts[0].Q_T == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("power fit recovers exponent and scale from synthetic data") {
    std::vector<std::pair<double, double>> pts;
    for (double x = 1.0; x <= 40.0; x += 1.0) pts.push_back({x, 0.7 * std::pow(x, 0.43)});
    const auto fit = power_fit(pts);
    CHECK(fit.c == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(fit.beta == doctest::Approx(0.43).epsilon(1e-10));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    // The fit requires strictly positive coordinates; callers filter first.
    pts.push_back({-3.0, 0.5});
    CHECK_THROWS_AS(power_fit(pts), std::invalid_argument);
    CHECK_THROWS_AS(power_fit({{1.0, 1.0}, {2.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("quote monotonicity across initial inventories holds on a clean setup") {
    const auto flow = constant_flow(10.0, 8.0, 201, 1.0);
    const auto pen = constant_penalty(flow, 0.04, 0.05);
    const IntensityModel m = ExponentialIntensity{1.0};
    const Truncation tr{30.0};
    QGrid g{-10.0, 10.0, 401, 1201, 1.0};
    const auto field = solve_decoupling_field(flow, pen, m, m, tr, g);
    const auto report =
        monotonicity_check(field, flow, pen, m, m, tr, {-2.0, -1.0, 0.0, 1.0, 2.0}, 1e-8);
    CHECK(report.ok);
    CHECK(report.worst_violation <= 1e-8);
}
