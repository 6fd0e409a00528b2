// Python bindings for the solver library: fill-rate models and the quote
// optimiser, deterministic flow paths, the affine/Riccati solvers, the
// decoupling-field PDE, the factor-driven coefficient PDE, the discrete
// lattice market-making model, and the execution-experiment drivers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mmq/as_lattice.hpp"
#include "mmq/cli.hpp"
#include "mmq/common.hpp"
#include "mmq/execution.hpp"
#include "mmq/factor_pde.hpp"
#include "mmq/fbsde_field.hpp"
#include "mmq/flow.hpp"
#include "mmq/intensity.hpp"
#include "mmq/riccati.hpp"

namespace py = pybind11;
using namespace mmq;

PYBIND11_MODULE(_mmq, m) {
    m.doc() =
        "Macroscopic market-making solvers: optimal bid/ask quoting against "
        "deterministic order-flow paths, price-impact sweeps, lattice-vs-"
        "continuum comparisons, and liquidation-schedule experiments.";

    // ----------------------------------------------------------- exceptions
    py::register_exception<numeric_error>(m, "NumericError");

    // ------------------------------------------------------ intensity layer
    py::class_<LinearIntensity>(m, "LinearIntensity",
                                "Linear fill fraction zeta - gamma*delta (not clamped at 0).")
        .def(py::init<double, double>(), py::arg("zeta"), py::arg("gamma"))
        .def_readwrite("zeta", &LinearIntensity::zeta)
        .def_readwrite("gamma", &LinearIntensity::gamma);

    py::class_<ExponentialIntensity>(m, "ExponentialIntensity",
                                     "Exponential fill fraction exp(-gamma*delta).")
        .def(py::init<double>(), py::arg("gamma"))
        .def_readwrite("gamma", &ExponentialIntensity::gamma);

    py::class_<Truncation>(m, "Truncation", "Hard clamp [-xi, xi] applied to optimal quotes.")
        .def(py::init<double>(), py::arg("xi"))
        .def_readwrite("xi", &Truncation::xi);

    py::class_<IntensityClassReport>(m, "IntensityClassReport")
        .def_readonly("decreasing", &IntensityClassReport::decreasing)
        .def_readonly("curvature_ok", &IntensityClassReport::curvature_ok)
        .def_readonly("vanishes_at_inf", &IntensityClassReport::vanishes_at_inf)
        .def_readonly("special_case", &IntensityClassReport::special_case)
        .def_readonly("curvature_ratio", &IntensityClassReport::curvature_ratio)
        .def_readonly("note", &IntensityClassReport::note)
        .def("in_class", &IntensityClassReport::in_class);

    m.def("validate_model", &validate_model, py::arg("model"));
    m.def("validate_intensity_class", &validate_intensity_class, py::arg("model"));
    m.def("lambda_value", &lambda_value, py::arg("model"), py::arg("delta"),
          "Fraction of flow captured when quoting delta from the mid-price.");
    m.def("w_value", &w_value, py::arg("model"), py::arg("p"),
          "sup_delta Lambda(delta)*(delta - p): optimised spread revenue per unit flow.");
    m.def("delta_star", &delta_star, py::arg("model"), py::arg("p"),
          "The unique maximiser of Lambda(delta)*(delta - p).");
    m.def("clamp_quote", &clamp_quote, py::arg("delta"), py::arg("trunc"));
    m.def("delta_star_truncated", &delta_star_truncated, py::arg("model"), py::arg("p"),
          py::arg("trunc"));
    m.def("default_truncation", &default_truncation, py::arg("model"), py::arg("y_bound"));
    m.def("forward_drift", &forward_drift, py::arg("model_a"), py::arg("model_b"), py::arg("a"),
          py::arg("b"), py::arg("y"), py::arg("trunc"),
          "Net inventory drift under the optimal quote feedback at adjoint value y.");

    // ------------------------------------------------------------ flow layer
    py::class_<FlowPath>(m, "FlowPath", "Deterministic buy/sell flow rates on a uniform grid.")
        .def(py::init<>())
        .def_readwrite("times", &FlowPath::times)
        .def_readwrite("a", &FlowPath::a)
        .def_readwrite("b", &FlowPath::b)
        .def("T", &FlowPath::T);

    py::class_<PenaltyPath>(m, "PenaltyPath", "Running weight phi(t) plus terminal weight A.")
        .def(py::init<>())
        .def_readwrite("phi", &PenaltyPath::phi)
        .def_readwrite("A_terminal", &PenaltyPath::A_terminal);

    m.def("validate_flow", &validate_flow, py::arg("path"));
    m.def("validate_penalty", &validate_penalty, py::arg("path"), py::arg("penalty"));
    m.def("constant_flow", &constant_flow, py::arg("rate_a"), py::arg("rate_b"), py::arg("n"),
          py::arg("T"));
    m.def("iid_flow", &iid_flow, py::arg("seed"), py::arg("mean"), py::arg("spread"),
          py::arg("n"), py::arg("T"),
          "Rates drawn i.i.d. uniform on [mean-spread, mean+spread], frozen per seed.");
    m.def("constant_penalty", &constant_penalty, py::arg("path"), py::arg("phi"),
          py::arg("A_terminal"));
    m.def("integrate_flow", &integrate_flow, py::arg("path"),
          "(integral of a, integral of b) by the trapezoid rule.");
    m.def("scale_to_imbalance", &scale_to_imbalance, py::arg("path"), py::arg("target"),
          "Rescales the buy side so that int a - int b equals the target.");

    py::class_<LinkFunction>(m, "LinkFunction",
                             "Clamped affine map level -> clamp(offset + slope*level, lo, hi).")
        .def(py::init([](double offset, double slope, double lo, double hi) {
                 return LinkFunction{offset, slope, lo, hi};
             }),
             py::arg("offset"), py::arg("slope"), py::arg("lo"), py::arg("hi"))
        .def_readwrite("offset", &LinkFunction::offset)
        .def_readwrite("slope", &LinkFunction::slope)
        .def_readwrite("lo", &LinkFunction::lo)
        .def_readwrite("hi", &LinkFunction::hi)
        .def("__call__", &LinkFunction::operator(), py::arg("level"));

    py::class_<OuFactor>(m, "OuFactor",
                         "Ornstein-Uhlenbeck factor plus links mapping its level to (a,b,phi,A).")
        .def(py::init<>())
        .def_readwrite("kappa", &OuFactor::kappa)
        .def_readwrite("mean", &OuFactor::mean)
        .def_readwrite("vol", &OuFactor::vol)
        .def_readwrite("l0", &OuFactor::l0)
        .def_readwrite("link_a", &OuFactor::link_a)
        .def_readwrite("link_b", &OuFactor::link_b)
        .def_readwrite("link_phi", &OuFactor::link_phi)
        .def_readwrite("link_A", &OuFactor::link_A);

    m.def("validate_factor", &validate_factor, py::arg("factor"));

    py::class_<FactorPathBundle>(m, "FactorPathBundle")
        .def_readonly("times", &FactorPathBundle::times)
        .def_readonly("l", &FactorPathBundle::l)
        .def_readonly("flow", &FactorPathBundle::flow)
        .def_readonly("penalty", &FactorPathBundle::penalty);

    m.def("simulate_ou_factor", &simulate_ou_factor, py::arg("factor"), py::arg("seed"),
          py::arg("n"), py::arg("T"));

    // --------------------------------------------- riccati / affine solvers
    py::class_<RiccatiSolution>(m, "RiccatiSolution")
        .def_readonly("times", &RiccatiSolution::times)
        .def_readonly("P", &RiccatiSolution::P);

    py::class_<AffineField>(m, "AffineField", "Adjoint representation Y = P*Q + H.")
        .def_readonly("times", &AffineField::times)
        .def_readonly("P", &AffineField::P)
        .def_readonly("H", &AffineField::H);

    py::class_<Trajectory>(m, "Trajectory",
                           "One controlled run: inventory, adjoint, quotes, objective.")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("Q", &Trajectory::Q)
        .def_readonly("Y", &Trajectory::Y)
        .def_readonly("delta_a", &Trajectory::delta_a)
        .def_readonly("delta_b", &Trajectory::delta_b)
        .def_readonly("objective", &Trajectory::objective);

    py::class_<HSystem>(m, "HSystem", "Quadratic value expansion h0 + h1*q + h2*q^2.")
        .def_readonly("times", &HSystem::times)
        .def_readonly("h2", &HSystem::h2)
        .def_readonly("h1", &HSystem::h1)
        .def_readonly("h0", &HSystem::h0);

    m.def("solve_riccati", &solve_riccati, py::arg("times"), py::arg("mu"), py::arg("phi"),
          py::arg("nu_terminal"),
          "Backward RK4 for dP/dt = -mu P^2 + 2 phi, P(T) = -nu.");
    m.def("riccati_closed_form_zero_phi", &riccati_closed_form_zero_phi, py::arg("times"),
          py::arg("mu"), py::arg("nu_terminal"));
    m.def("solve_h_system", &solve_h_system, py::arg("flow"), py::arg("penalty"),
          py::arg("zeta"), py::arg("gamma"),
          "Value coefficients for the linear fill fraction and deterministic flows.");
    m.def("solve_affine_fbsde", &solve_affine_fbsde, py::arg("flow"), py::arg("penalty"),
          py::arg("zeta"), py::arg("gamma"), py::arg("q0"),
          "Linear-intensity optimal control; returns (AffineField, Trajectory).");
    m.def("impact_linear_closed_form", &impact_linear_closed_form, py::arg("zeta"),
          py::arg("gamma"), py::arg("A"), py::arg("q0"), py::arg("x"),
          "Terminal ask quote after one-sided volume x, linear fill fraction.");

    py::class_<ImpactRoot>(m, "ImpactRoot")
        .def_readonly("Q_T", &ImpactRoot::Q_T)
        .def_readonly("delta_a_T", &ImpactRoot::delta_a_T);

    m.def("impact_exponential_root", &impact_exponential_root, py::arg("gamma"), py::arg("A"),
          py::arg("q0"), py::arg("x"),
          "Terminal inventory and ask quote after one-sided volume x, exponential model.");

    // ------------------------------------------------------ decoupling field
    py::class_<QGrid>(m, "QGrid", "Uniform (t, q) lattice.")
        .def(py::init([](double q_min, double q_max, std::size_t n_q, std::size_t n_t,
                         double T) { return QGrid{q_min, q_max, n_q, n_t, T}; }),
             py::arg("q_min"), py::arg("q_max"), py::arg("n_q"), py::arg("n_t"), py::arg("T"))
        .def_readwrite("q_min", &QGrid::q_min)
        .def_readwrite("q_max", &QGrid::q_max)
        .def_readwrite("n_q", &QGrid::n_q)
        .def_readwrite("n_t", &QGrid::n_t)
        .def_readwrite("T", &QGrid::T);

    py::class_<DecouplingField>(m, "DecouplingField",
                                "u(t, q) with Y_t = u(t, Q_t) along optimal paths.")
        .def_readonly("grid", &DecouplingField::grid)
        .def_readonly("times", &DecouplingField::times)
        .def_readonly("q", &DecouplingField::q)
        .def_readonly("u", &DecouplingField::u)
        .def("value", &DecouplingField::value, py::arg("i_t"), py::arg("j_q"))
        .def("at", &DecouplingField::at, py::arg("t"), py::arg("q"),
             "Bilinear interpolation, clamped to the lattice hull.");

    m.def("solve_decoupling_field", &solve_decoupling_field, py::arg("flow"), py::arg("penalty"),
          py::arg("model_a"), py::arg("model_b"), py::arg("trunc"), py::arg("grid"),
          "Backward upwind solve of u_t + mu(u) u_q = 2 phi(t) q, u(T,q) = -2 A q.");
    m.def("forward_trajectory", &forward_trajectory, py::arg("field"), py::arg("flow"),
          py::arg("penalty"), py::arg("model_a"), py::arg("model_b"), py::arg("trunc"),
          py::arg("q0"));
    m.def("auto_qgrid", &auto_qgrid, py::arg("flow"), py::arg("penalty"), py::arg("model_a"),
          py::arg("model_b"), py::arg("trunc"), py::arg("q0"), py::arg("n_q"),
          py::arg("min_n_t") = 401,
          "Domain and time resolution that keep the field solve stable.");

    py::class_<ImpactPoint>(m, "ImpactPoint")
        .def_readonly("imbalance", &ImpactPoint::imbalance)
        .def_readonly("delta_a_T", &ImpactPoint::delta_a_T)
        .def_readonly("Q_T", &ImpactPoint::Q_T);

    m.def("impact_sweep", &impact_sweep, py::arg("base_flow"), py::arg("penalty"),
          py::arg("model_a"), py::arg("model_b"), py::arg("trunc"), py::arg("grid"),
          py::arg("targets"), py::arg("q0"),
          "Terminal ask quote for each target imbalance (flows rescaled per target).");

    py::class_<PowerFit>(m, "PowerFit")
        .def_readonly("c", &PowerFit::c)
        .def_readonly("beta", &PowerFit::beta)
        .def_readonly("r2", &PowerFit::r2);

    m.def("power_fit", &power_fit, py::arg("points"),
          "Log-log least squares y ~ c x^beta over strictly positive points.");

    py::class_<MonotonicityReport>(m, "MonotonicityReport")
        .def_readonly("ok", &MonotonicityReport::ok)
        .def_readonly("worst_violation", &MonotonicityReport::worst_violation)
        .def_readonly("note", &MonotonicityReport::note);

    m.def("monotonicity_check", &monotonicity_check, py::arg("field"), py::arg("flow"),
          py::arg("penalty"), py::arg("model_a"), py::arg("model_b"), py::arg("trunc"),
          py::arg("q_list"), py::arg("tol"),
          "Quote paths from increasing initial inventories must stay ordered.");

    // -------------------------------------------------- factor-driven PDE
    py::class_<FactorGrid>(m, "FactorGrid", "Uniform (t, level) lattice.")
        .def(py::init([](double l_min, double l_max, std::size_t n_l, std::size_t n_t,
                         double T) { return FactorGrid{l_min, l_max, n_l, n_t, T}; }),
             py::arg("l_min"), py::arg("l_max"), py::arg("n_l"), py::arg("n_t"), py::arg("T"))
        .def_readwrite("l_min", &FactorGrid::l_min)
        .def_readwrite("l_max", &FactorGrid::l_max)
        .def_readwrite("n_l", &FactorGrid::n_l)
        .def_readwrite("n_t", &FactorGrid::n_t)
        .def_readwrite("T", &FactorGrid::T);

    py::class_<HSurface>(m, "HSurface",
                         "Factor-dependent value coefficients h2/h1/h0 on the lattice.")
        .def_readonly("grid", &HSurface::grid)
        .def_readonly("times", &HSurface::times)
        .def_readonly("l", &HSurface::l)
        .def_readonly("h2", &HSurface::h2)
        .def_readonly("h1", &HSurface::h1)
        .def_readonly("h0", &HSurface::h0)
        .def("h2_at", &HSurface::h2_at, py::arg("i_t"), py::arg("j_l"))
        .def("h1_at", &HSurface::h1_at, py::arg("i_t"), py::arg("j_l"))
        .def("h0_at", &HSurface::h0_at, py::arg("i_t"), py::arg("j_l"));

    m.def("solve_h2_pde", &solve_h2_pde, py::arg("factor"), py::arg("grid"), py::arg("gamma"),
          py::arg("theta") = 0.5,
          "Backward Crank-Nicolson solve of the quadratic-coefficient equation.");
    m.def("solve_h1_h0_pde", &solve_h1_h0_pde, py::arg("h2_surface"), py::arg("factor"),
          py::arg("zeta"), py::arg("gamma"), py::arg("theta") = 0.5);

    py::class_<McParams>(m, "McParams")
        .def(py::init<>())
        .def_readwrite("n_paths", &McParams::n_paths)
        .def_readwrite("n_steps", &McParams::n_steps)
        .def_readwrite("seed", &McParams::seed);

    py::class_<FkResult>(m, "FkResult")
        .def_readonly("grid", &FkResult::grid)
        .def_readonly("times", &FkResult::times)
        .def_readonly("l", &FkResult::l)
        .def_readonly("h2", &FkResult::h2)
        .def_readonly("std_err", &FkResult::std_err)
        .def_readonly("iterations", &FkResult::iterations)
        .def_readonly("final_change", &FkResult::final_change);

    m.def("feynman_kac_fixed_point", &feynman_kac_fixed_point, py::arg("factor"),
          py::arg("gamma"), py::arg("mc"), py::arg("lattice"),
          "Monte Carlo fixed-point cross-check of the quadratic-coefficient PDE.");

    py::class_<QuoteSurfacePair>(m, "QuoteSurfacePair")
        .def_readonly("delta_a", &QuoteSurfacePair::delta_a)
        .def_readonly("delta_b", &QuoteSurfacePair::delta_b);

    m.def("quote_surface", &quote_surface, py::arg("h"), py::arg("zeta"), py::arg("gamma"),
          py::arg("q"), "Feedback quotes over the lattice at inventory q.");

    // ------------------------------------------------------ discrete lattice
    py::class_<ASParams>(m, "ASParams",
                         "Point-process market-making parameters (unit-size orders).")
        .def(py::init<>())
        .def_readwrite("delta_size", &ASParams::delta_size)
        .def_readwrite("lambda_a", &ASParams::lambda_a)
        .def_readwrite("lambda_b", &ASParams::lambda_b)
        .def_readwrite("sigma", &ASParams::sigma)
        .def_readwrite("A", &ASParams::A)
        .def_readwrite("gamma", &ASParams::gamma)
        .def_readwrite("T", &ASParams::T)
        .def_readwrite("q_bound", &ASParams::q_bound);

    py::class_<ThetaSurface>(m, "ThetaSurface")
        .def_readonly("times", &ThetaSurface::times)
        .def_readonly("q", &ThetaSurface::q)
        .def_readonly("theta", &ThetaSurface::theta)
        .def("value", &ThetaSurface::value, py::arg("i_t"), py::arg("k_q"));

    m.def("validate_as_params", &validate_as_params, py::arg("params"));
    m.def("solve_theta_discrete", &solve_theta_discrete, py::arg("params"), py::arg("n_t"),
          "Backward RK4 over the coupled inventory-lattice ODEs.");

    py::class_<QuoteLattice>(m, "QuoteLattice")
        .def_readonly("times", &QuoteLattice::times)
        .def_readonly("q", &QuoteLattice::q)
        .def_readonly("delta_a", &QuoteLattice::delta_a)
        .def_readonly("delta_b", &QuoteLattice::delta_b);

    m.def("optimal_quotes_discrete", &optimal_quotes_discrete, py::arg("theta"),
          py::arg("params"));

    py::class_<SimResult>(m, "SimResult")
        .def_readonly("times", &SimResult::times)
        .def_readonly("mean_q", &SimResult::mean_q)
        .def_readonly("std_err", &SimResult::std_err)
        .def_readonly("q_states", &SimResult::q_states)
        .def_readonly("occupancy", &SimResult::occupancy)
        .def_readonly("accuracy_warning", &SimResult::accuracy_warning)
        .def_readonly("max_step_prob", &SimResult::max_step_prob)
        .def_readonly("edge_fraction", &SimResult::edge_fraction);

    m.def("simulate_as_paths", &simulate_as_paths, py::arg("theta"), py::arg("params"),
          py::arg("q0"), py::arg("seed"), py::arg("n_paths"), py::arg("n_steps"),
          "Thin-step Bernoulli simulation of executions under the lattice quotes.");
    m.def("solve_theta_macro", &solve_theta_macro, py::arg("params"), py::arg("grid"),
          "Macroscopic analogue of the lattice value on a continuous inventory grid.");
    m.def("macro_inventory_path", &macro_inventory_path, py::arg("theta_macro"),
          py::arg("params"), py::arg("q0"));

    py::class_<CompareRow>(m, "CompareRow")
        .def_readonly("delta_size", &CompareRow::delta_size)
        .def_readonly("sup_gap", &CompareRow::sup_gap)
        .def_readonly("q", &CompareRow::q)
        .def_readonly("theta_discrete", &CompareRow::theta_discrete)
        .def_readonly("theta_macro", &CompareRow::theta_macro);

    m.def("compare_theta", &compare_theta, py::arg("base"), py::arg("deltas"), py::arg("q_lo"),
          py::arg("q_hi"), "t = 0 gap between the lattice and macroscopic values per pitch.");

    // ----------------------------------------------------------- execution
    py::enum_<StrategyKind>(m, "StrategyKind")
        .value("twap", StrategyKind::twap)
        .value("vwap", StrategyKind::vwap)
        .value("exploit", StrategyKind::exploit);

    py::class_<ExecutionPlan>(m, "ExecutionPlan")
        .def(py::init<>())
        .def_readwrite("kind", &ExecutionPlan::kind)
        .def_readwrite("v", &ExecutionPlan::v)
        .def_readwrite("q0_exec", &ExecutionPlan::q0_exec);

    m.def("make_strategy", &make_strategy, py::arg("kind"), py::arg("flow"), py::arg("q0_exec"),
          "Uniform, volume-proportional, or back-loaded sell schedule.");
    m.def("validate_plan", &validate_plan, py::arg("plan"), py::arg("flow"));
    m.def("evaluate_execution", &evaluate_execution, py::arg("plan"), py::arg("background"),
          py::arg("penalty"), py::arg("model_a"), py::arg("model_b"), py::arg("trunc"),
          py::arg("grid"), py::arg("q0_mm") = 0.0,
          "Objective of a sell schedule against the quoting market maker.");

    py::class_<ExecExperimentParams>(m, "ExecExperimentParams")
        .def(py::init<>())
        .def_readwrite("n_trials", &ExecExperimentParams::n_trials)
        .def_readwrite("seed", &ExecExperimentParams::seed)
        .def_readwrite("gamma", &ExecExperimentParams::gamma)
        .def_readwrite("T", &ExecExperimentParams::T)
        .def_readwrite("phi", &ExecExperimentParams::phi)
        .def_readwrite("A", &ExecExperimentParams::A)
        .def_readwrite("q0_mm", &ExecExperimentParams::q0_mm)
        .def_readwrite("q0_exec", &ExecExperimentParams::q0_exec)
        .def_readwrite("imbalance", &ExecExperimentParams::imbalance)
        .def_readwrite("flow_mean", &ExecExperimentParams::flow_mean)
        .def_readwrite("flow_spread", &ExecExperimentParams::flow_spread)
        .def_readwrite("n_grid", &ExecExperimentParams::n_grid)
        .def_readwrite("n_q", &ExecExperimentParams::n_q);

    py::class_<ExecTrial>(m, "ExecTrial")
        .def_readonly("trial", &ExecTrial::trial)
        .def_readonly("twap", &ExecTrial::twap)
        .def_readonly("vwap", &ExecTrial::vwap)
        .def_readonly("exploit", &ExecTrial::exploit_);

    py::class_<ExecSummary>(m, "ExecSummary")
        .def_readonly("trials", &ExecSummary::trials)
        .def_readonly("mean_twap", &ExecSummary::mean_twap)
        .def_readonly("mean_vwap", &ExecSummary::mean_vwap)
        .def_readonly("mean_exploit", &ExecSummary::mean_exploit);

    m.def("run_exec_experiment", &run_exec_experiment, py::arg("params"),
          "Seeded comparison of the three schedules over random background flows.");

    // ------------------------------------------------------------- utilities
    m.def("mix_seed", &mix_seed, py::arg("master"), py::arg("counter"),
          "Derive an independent substream seed.");
    m.def("uniform_grid", &uniform_grid, py::arg("t0"), py::arg("t1"), py::arg("n"));
    m.def("trapezoid", &trapezoid, py::arg("t"), py::arg("f"));
    m.def("integrate_square_pl", &integrate_square_pl, py::arg("t"), py::arg("f"),
          "Exact integral of the square of a piecewise-linear function.");

    // Run the experiment CLI in-process: returns (exit_code, stdout, stderr).
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"),
        "Invoke the experiment front end; returns (exit_code, stdout, stderr).");
}
