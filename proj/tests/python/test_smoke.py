"""Smoke tests for the compiled extension: one quick exercise per module."""

import math

import pytest

import mmq


def test_import_surface():
    for name in (
        "LinearIntensity",
        "ExponentialIntensity",
        "w_value",
        "delta_star",
        "constant_flow",
        "solve_riccati",
        "solve_affine_fbsde",
        "solve_decoupling_field",
        "solve_h2_pde",
        "solve_theta_discrete",
        "run_exec_experiment",
        "run_cli",
    ):
        assert hasattr(mmq, name), name


def test_quote_optimiser_closed_forms():
    exp = mmq.ExponentialIntensity(gamma=2.0)
    assert mmq.delta_star(exp, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert mmq.w_value(exp, 0.0) == pytest.approx(math.exp(-1.0) / 2.0, rel=1e-14)

    lin = mmq.LinearIntensity(zeta=1.0, gamma=2.0)
    # maximiser zeta/(2 gamma) + p/2 and value gamma/4 (zeta/gamma - p)^2
    assert mmq.delta_star(lin, 0.1) == pytest.approx(0.3, rel=1e-14)
    assert mmq.w_value(lin, 0.1) == pytest.approx(2.0 / 4.0 * (0.5 - 0.1) ** 2, rel=1e-14)
    assert mmq.validate_intensity_class(exp).in_class()


def test_flow_and_penalty_round_trip():
    flow = mmq.constant_flow(rate_a=10.0, rate_b=10.0, n=101, T=1.0)
    ia, ib = mmq.integrate_flow(flow)
    assert ia == pytest.approx(10.0, rel=1e-12)
    assert ib == pytest.approx(10.0, rel=1e-12)
    tilted = mmq.scale_to_imbalance(flow, 5.0)
    ia2, ib2 = mmq.integrate_flow(tilted)
    assert ia2 - ib2 == pytest.approx(5.0, rel=1e-12)

    rnd = mmq.iid_flow(seed=7, mean=10.0, spread=5.0, n=51, T=1.0)
    assert min(rnd.a) >= 5.0 and max(rnd.a) <= 15.0
    again = mmq.iid_flow(seed=7, mean=10.0, spread=5.0, n=51, T=1.0)
    assert rnd.a == again.a and rnd.b == again.b


def test_affine_solver_symmetric_flow():
    flow = mmq.constant_flow(10.0, 10.0, 201, 1.0)
    pen = mmq.constant_penalty(flow, phi=0.1, A_terminal=0.05)
    field, traj = mmq.solve_affine_fbsde(flow, pen, zeta=1.0, gamma=1.0, q0=0.0)
    # symmetric flow from zero inventory: inventory stays put, quotes sit at
    # the static optimum zeta / (2 gamma)
    assert max(abs(q) for q in traj.Q) < 1e-12
    assert traj.delta_a[0] == pytest.approx(0.5, abs=1e-12)
    assert field.P[-1] == pytest.approx(-2.0 * 0.05, abs=1e-15)


def test_riccati_stays_in_band():
    times = mmq.uniform_grid(0.0, 1.0, 201)
    n = len(times)
    sol = mmq.solve_riccati(times, [10.0] * n, [0.3] * n, nu_terminal=0.4)
    lo = -(0.4 + 2 * 0.3 * 1.0)
    assert all(lo - 1e-12 <= p <= 0.0 for p in sol.P)
    closed = mmq.riccati_closed_form_zero_phi(times, [12.5] * n, nu_terminal=0.08)
    zero_phi = mmq.solve_riccati(times, [12.5] * n, [0.0] * n, nu_terminal=0.08)
    gap = max(abs(x - y) for x, y in zip(closed, zero_phi.P))
    assert gap < 1e-8


def test_decoupling_field_terminal_slice_and_impact():
    flow = mmq.constant_flow(10.0, 10.0, 201, 1.0)
    pen = mmq.constant_penalty(flow, 0.02, 0.02)
    exp = mmq.ExponentialIntensity(1.0)
    trunc = mmq.Truncation(50.0)
    grid = mmq.QGrid(-8.0, 8.0, 201, 401, 1.0)
    field = mmq.solve_decoupling_field(flow, pen, exp, exp, trunc, grid)
    # terminal condition u(T, q) = -2 A q, exact on the lattice
    for j, q in enumerate(field.q):
        assert field.value(len(field.times) - 1, j) == pytest.approx(
            -2.0 * 0.02 * q, abs=1e-12
        )
    traj = mmq.forward_trajectory(field, flow, pen, exp, exp, trunc, q0=0.0)
    assert abs(traj.Q[-1]) < 1e-8  # symmetric flow keeps inventory flat

    # one-sided linear-model impact has a closed form
    assert mmq.impact_linear_closed_form(
        zeta=1.0, gamma=2.0, A=0.05, q0=0.0, x=10.0
    ) == pytest.approx(0.25 + 10.0 / (2 * (20.0 + 20.0)), rel=1e-12)
    root = mmq.impact_exponential_root(gamma=1.0, A=0.05, q0=0.0, x=10.0)
    assert root.Q_T < 0.0
    assert root.delta_a_T == pytest.approx(1.0 - 2 * 0.05 * root.Q_T, rel=1e-12)


def test_factor_pde_flat_links_match_ode():
    factor = mmq.OuFactor()
    factor.kappa = 1.0
    factor.mean = 0.0
    factor.vol = 0.5
    factor.l0 = 0.0
    factor.link_a = mmq.LinkFunction(10.0, 0.0, 10.0, 10.0)
    factor.link_b = mmq.LinkFunction(10.0, 0.0, 10.0, 10.0)
    factor.link_phi = mmq.LinkFunction(0.1, 0.0, 0.1, 0.1)
    factor.link_A = mmq.LinkFunction(0.2, 0.0, 0.2, 0.2)
    grid = mmq.FactorGrid(-2.0, 2.0, 41, 101, 1.0)
    surf = mmq.solve_h2_pde(factor, grid, gamma=2.0)
    times = mmq.uniform_grid(0.0, 1.0, 501)
    n = len(times)
    ric = mmq.solve_riccati(times, [2.0 * 20.0] * n, [0.05] * n, nu_terminal=0.2)
    # flat links make the PDE level-independent: every column equals the ODE
    gap = max(
        abs(surf.h2_at(i, j) - ric.P[i * 5])
        for i in range(0, 101)
        for j in (0, 20, 40)
    )
    assert gap < 1e-4


def test_lattice_zero_intensity_closed_form():
    p = mmq.ASParams()
    p.delta_size = 1.0
    p.lambda_a = 0.0
    p.lambda_b = 0.0
    p.sigma = math.sqrt(0.1)
    p.A = 0.05
    p.gamma = 1.0
    p.T = 1.0
    p.q_bound = 5.0
    theta = mmq.solve_theta_discrete(p, n_t=101)
    for k, q in enumerate(theta.q):
        want = -(0.05 + 0.1 * 1.0 / 2.0) * q * q
        assert theta.value(0, k) == pytest.approx(want, abs=1e-9)


def test_execution_strategies_liquidate_exactly():
    flow = mmq.constant_flow(10.0, 10.0, 201, 1.0)
    for kind in (mmq.StrategyKind.twap, mmq.StrategyKind.vwap, mmq.StrategyKind.exploit):
        plan = mmq.make_strategy(kind, flow, q0_exec=40.0)
        sold = mmq.trapezoid(flow.times, plan.v)
        assert sold == pytest.approx(-40.0, abs=1e-10)
    with pytest.raises(Exception):
        mmq.make_strategy(mmq.StrategyKind.twap, flow, q0_exec=0.0)


def test_numeric_error_is_catchable():
    p = mmq.ASParams()
    p.delta_size = 1.0
    p.lambda_a = 10.0
    p.lambda_b = 10.0
    p.sigma = math.sqrt(0.1)
    p.A = 0.05
    p.gamma = 1.0
    p.T = 1.0
    p.q_bound = 6.0
    # absurdly coarse time grid blows up the explicit macro stepping
    with pytest.raises(mmq.NumericError):
        mmq.solve_theta_macro(p, mmq.QGrid(-6.0, 6.0, 601, 3, 1.0))


def test_cli_runs_in_process(tmp_path):
    code, out, err = mmq.run_cli(["--help"])
    assert code == 0 and "riccati" in out and err == ""

    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "[run]\n"
        f"out_dir = {tmp_path / 'out'}\n"
        "q0 = 10\n"
        "[model]\n"
        "zeta = 1\n"
        "gamma = 2\n"
        "[flow]\n"
        "rate_a = 10\n"
        "rate_b = 0\n"
        "n = 201\n"
        "T = 1\n"
        "[penalty]\n"
        "phi = 0\n"
        "A = 0.05\n"
    )
    code, out, err = mmq.run_cli(["riccati", "--config", str(cfg)])
    assert code == 0, err
    assert (tmp_path / "out" / "trajectory.csv").exists()

    code, _, err = mmq.run_cli(["riccati", "--config", str(tmp_path / "missing.cfg")])
    assert code == 2 and "error: config:" in err


def test_seed_mixing_is_deterministic():
    assert mmq.mix_seed(1, 2) == mmq.mix_seed(1, 2)
    assert mmq.mix_seed(1, 2) != mmq.mix_seed(1, 3)
