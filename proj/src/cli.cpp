#include "mmq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "mmq/as_lattice.hpp"
#include "mmq/common.hpp"
#include "mmq/config.hpp"
#include "mmq/execution.hpp"
#include "mmq/factor_pde.hpp"
#include "mmq/fbsde_field.hpp"
#include "mmq/flow.hpp"
#include "mmq/intensity.hpp"
#include "mmq/riccati.hpp"

namespace mmq {

namespace {

// Everything an experiment produces is buffered here and written only after
// the run succeeds, so error exits never leave partial CSVs behind.
struct OutputBundle {
    std::vector<std::pair<std::string, std::string>> files;

    void add(std::string name, std::string content) {
        files.emplace_back(std::move(name), std::move(content));
    }

    void flush(const std::string& dir) const {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw std::invalid_argument("cannot create output directory '" + dir + "'");
        for (const auto& [name, content] : files) {
            const fs::path target = fs::path(dir) / name;
            std::ofstream f(target, std::ios::binary | std::ios::trunc);
            f << content;
            if (!f) throw std::invalid_argument("cannot write output file '" + target.string() + "'");
        }
    }
};

FlowPath build_constant_flow(double rate_a, double rate_b, std::size_t n, double T) {
    if (rate_a < 0 || rate_b < 0)
        throw std::invalid_argument("flow rates must be nonnegative");
    if (rate_a > 0 && rate_b > 0) return constant_flow(rate_a, rate_b, n, T);
    FlowPath f;
    f.times = uniform_grid(0.0, T, n);
    f.a.assign(n, rate_a);
    f.b.assign(n, rate_b);
    validate_flow(f);
    return f;
}

// [flow] + [penalty] sections shared by riccati / solve-fbsde / impact-sweep.
std::pair<FlowPath, PenaltyPath> load_flow(const Config& cfg, double default_phi,
                                           double default_A) {
    const std::string mode = cfg.text("flow.mode", "constant");
    if (mode == "csv") {
        if (cfg.has("penalty.phi") || cfg.has("penalty.A"))
            throw std::invalid_argument(
                "penalty.* keys conflict with flow.mode = csv (the file carries them)");
        const std::string path = cfg.text("flow.csv", "");
        if (path.empty()) throw std::invalid_argument("flow.csv is required when flow.mode = csv");
        return read_flow_csv(path);
    }
    if (mode != "constant")
        throw std::invalid_argument("flow.mode must be 'constant' or 'csv'");
    const double T = cfg.number("flow.T", 1.0);
    const auto n = static_cast<std::size_t>(cfg.integer("flow.n", 1001));
    FlowPath flow = build_constant_flow(cfg.number("flow.rate_a", 10.0),
                                        cfg.number("flow.rate_b", 10.0), n, T);
    PenaltyPath pen = constant_penalty(flow, cfg.number("penalty.phi", default_phi),
                                       cfg.number("penalty.A", default_A));
    return {flow, pen};
}

LinkFunction load_link(const Config& cfg, const std::string& section, LinkFunction def) {
    LinkFunction f;
    f.offset = cfg.number(section + ".offset", def.offset);
    f.slope = cfg.number(section + ".slope", def.slope);
    f.lo = cfg.number(section + ".lo", def.lo);
    f.hi = cfg.number(section + ".hi", def.hi);
    return f;
}

double max_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

Truncation truncation_for(const Config& cfg, const IntensityModel& model, const FlowPath& flow,
                          const PenaltyPath& pen, double q0, double flow_scale = 1.0) {
    const double xi = cfg.number("model.xi", 0.0);
    if (xi > 0) return Truncation{xi};
    const auto [int_a, int_b] = integrate_flow(flow);
    const double reach = std::abs(q0) + 0.15 * (flow_scale * int_a + int_b) + 2.0;
    const double y_bound = 2.0 * (pen.A_terminal + max_of(pen.phi) * flow.T()) * reach + 1.0;
    return default_truncation(model, y_bound);
}

// Keeps every stride-th time slice (terminal slice always included) so the
// big surfaces stay plottable without gigabyte CSVs.
template <class CopyRow>
std::vector<std::size_t> decimate_indices(std::size_t n_t, std::size_t max_slices,
                                          CopyRow&& copy_row) {
    std::size_t stride = 1;
    if (max_slices >= 2 && n_t > max_slices)
        stride = (n_t - 2 + max_slices - 1) / (max_slices - 1);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < n_t; i += stride) kept.push_back(i);
    if (kept.back() != n_t - 1) kept.push_back(n_t - 1);
    for (std::size_t i : kept) copy_row(i);
    return kept;
}

ThetaSurface decimate_theta(const ThetaSurface& s, std::size_t max_slices) {
    ThetaSurface o;
    o.q = s.q;
    decimate_indices(s.times.size(), max_slices, [&](std::size_t i) {
        o.times.push_back(s.times[i]);
        o.theta.insert(o.theta.end(), s.theta.begin() + i * s.q.size(),
                       s.theta.begin() + (i + 1) * s.q.size());
    });
    return o;
}

SimResult decimate_heatmap(const SimResult& sim, std::size_t max_slices) {
    SimResult o;
    o.q_states = sim.q_states;
    decimate_indices(sim.times.size(), max_slices, [&](std::size_t i) {
        o.times.push_back(sim.times[i]);
        o.occupancy.push_back(sim.occupancy[i]);
    });
    return o;
}

// ------------------------------------------------------------- plot scripts

constexpr const char* kPlotPreamble =
    "#!/usr/bin/env python3\n"
    "\"\"\"Render the CSVs emitted next to this script.  Requires matplotlib.\"\"\"\n"
    "import csv, os\n"
    "import matplotlib\n"
    "matplotlib.use(\"Agg\")\n"
    "import matplotlib.pyplot as plt\n"
    "\n"
    "HERE = os.path.dirname(os.path.abspath(__file__))\n"
    "\n"
    "def load(name):\n"
    "    path = os.path.join(HERE, name)\n"
    "    if not os.path.exists(path):\n"
    "        return None\n"
    "    with open(path) as f:\n"
    "        rows = list(csv.reader(r for r in f if not r.startswith(\"#\")))\n"
    "    head, data = rows[0], rows[1:]\n"
    "    return {h: [float(r[i]) for r in data] for i, h in enumerate(head)}\n"
    "\n";

const char* plot_riccati_script() {
    return
        "d = load(\"affine_field.csv\")\n"
        "t = load(\"trajectory.csv\")\n"
        "h = load(\"h_system.csv\")\n"
        "fig, ax = plt.subplots(1, 3, figsize=(14, 4))\n"
        "ax[0].plot(d[\"t\"], d[\"P\"], label=\"P\")\n"
        "ax[0].plot(d[\"t\"], d[\"H\"], label=\"H\")\n"
        "ax[0].set_xlabel(\"t\"); ax[0].legend(); ax[0].set_title(\"adjoint coefficients\")\n"
        "ax[1].plot(t[\"t\"], t[\"Q\"], label=\"Q\")\n"
        "ax[1].set_xlabel(\"t\"); ax[1].legend(); ax[1].set_title(\"inventory\")\n"
        "ax[2].plot(t[\"t\"], t[\"delta_a\"], label=\"ask\")\n"
        "ax[2].plot(t[\"t\"], t[\"delta_b\"], label=\"bid\")\n"
        "if h:\n"
        "    ax[2].plot(h[\"t\"], h[\"h1\"], \"--\", label=\"h1\")\n"
        "ax[2].set_xlabel(\"t\"); ax[2].legend(); ax[2].set_title(\"quotes\")\n"
        "fig.tight_layout(); fig.savefig(os.path.join(HERE, \"riccati.png\"), dpi=150)\n"
        "print(\"wrote riccati.png\")\n";
}

const char* plot_hjb_script() {
    return
        "d = load(\"h_surface.csv\")\n"
        "ts = sorted(set(d[\"t\"]))\n"
        "ls = sorted(set(d[\"l\"]))\n"
        "grid = {(r, c): v for r, c, v in zip(d[\"t\"], d[\"l\"], d[\"h2\"])}\n"
        "img = [[grid[(t, l)] for l in ls] for t in ts]\n"
        "fig, ax = plt.subplots(1, 2, figsize=(11, 4))\n"
        "im = ax[0].imshow(img, aspect=\"auto\", origin=\"lower\",\n"
        "                  extent=[ls[0], ls[-1], ts[0], ts[-1]])\n"
        "fig.colorbar(im, ax=ax[0]); ax[0].set_xlabel(\"l\"); ax[0].set_ylabel(\"t\")\n"
        "ax[0].set_title(\"h2(t, l)\")\n"
        "for frac in (0.0, 0.5, 1.0):\n"
        "    t0 = ts[int(frac * (len(ts) - 1))]\n"
        "    ax[1].plot(ls, [grid[(t0, l)] for l in ls], label=f\"t={t0:.2f}\")\n"
        "ax[1].set_xlabel(\"l\"); ax[1].legend(); ax[1].set_title(\"h2 slices\")\n"
        "fig.tight_layout(); fig.savefig(os.path.join(HERE, \"hjb.png\"), dpi=150)\n"
        "print(\"wrote hjb.png\")\n";
}

const char* plot_fbsde_script() {
    return
        "d = load(\"field.csv\")\n"
        "t = load(\"trajectory.csv\")\n"
        "ts = sorted(set(d[\"t\"]))\n"
        "qs = sorted(set(d[\"q\"]))\n"
        "grid = {(r, c): v for r, c, v in zip(d[\"t\"], d[\"q\"], d[\"u\"])}\n"
        "fig, ax = plt.subplots(1, 3, figsize=(14, 4))\n"
        "img = [[grid[(tt, q)] for q in qs] for tt in ts]\n"
        "im = ax[0].imshow(img, aspect=\"auto\", origin=\"lower\",\n"
        "                  extent=[qs[0], qs[-1], ts[0], ts[-1]])\n"
        "fig.colorbar(im, ax=ax[0]); ax[0].set_xlabel(\"q\"); ax[0].set_ylabel(\"t\")\n"
        "ax[0].set_title(\"decoupling field u(t, q)\")\n"
        "ax[1].plot(t[\"t\"], t[\"Q\"])\n"
        "ax[1].set_xlabel(\"t\"); ax[1].set_title(\"inventory\")\n"
        "ax[2].plot(t[\"t\"], t[\"delta_a\"], label=\"ask\")\n"
        "ax[2].plot(t[\"t\"], t[\"delta_b\"], label=\"bid\")\n"
        "ax[2].set_xlabel(\"t\"); ax[2].legend(); ax[2].set_title(\"quotes\")\n"
        "fig.tight_layout(); fig.savefig(os.path.join(HERE, \"fbsde.png\"), dpi=150)\n"
        "print(\"wrote fbsde.png\")\n";
}

const char* plot_as_script() {
    return
        "detail = load(\"compare_detail.csv\")\n"
        "mean = load(\"as_mean_path.csv\")\n"
        "macro = load(\"as_macro_path.csv\")\n"
        "heat = load(\"as_heatmap.csv\")\n"
        "panels = sum(x is not None for x in (detail, mean, heat))\n"
        "if panels == 0:\n"
        "    raise SystemExit(\"nothing to plot\")\n"
        "fig, axes = plt.subplots(1, panels, figsize=(5 * panels, 4))\n"
        "axes = [axes] if panels == 1 else list(axes)\n"
        "if detail:\n"
        "    ax = axes.pop(0)\n"
        "    for d in sorted(set(detail[\"delta\"]), reverse=True):\n"
        "        pts = [(q, td, tm) for dd, q, td, tm in zip(detail[\"delta\"], detail[\"q\"],\n"
        "               detail[\"theta_discrete\"], detail[\"theta_macro\"]) if dd == d]\n"
        "        ax.plot([p[0] for p in pts], [p[1] for p in pts], \"o-\", ms=2,\n"
        "                label=f\"lattice d={d}\")\n"
        "        ax.plot([p[0] for p in pts], [p[2] for p in pts], \"--\",\n"
        "                label=f\"macro d={d}\")\n"
        "    ax.set_xlabel(\"q\"); ax.legend(fontsize=7); ax.set_title(\"theta(0, q)\")\n"
        "if mean:\n"
        "    ax = axes.pop(0)\n"
        "    lo = [m - 3 * s for m, s in zip(mean[\"mean_q\"], mean[\"stderr\"])]\n"
        "    hi = [m + 3 * s for m, s in zip(mean[\"mean_q\"], mean[\"stderr\"])]\n"
        "    ax.fill_between(mean[\"t\"], lo, hi, alpha=0.3, label=\"mc 3se\")\n"
        "    ax.plot(mean[\"t\"], mean[\"mean_q\"], label=\"mc mean\")\n"
        "    if macro:\n"
        "        ax.plot(macro[\"t\"], macro[\"Q\"], \"--\", label=\"macro\")\n"
        "    ax.set_xlabel(\"t\"); ax.legend(); ax.set_title(\"inventory path\")\n"
        "if heat:\n"
        "    ax = axes.pop(0)\n"
        "    ts = sorted(set(heat[\"t\"]))\n"
        "    qs = sorted(set(heat[\"q\"]))\n"
        "    grid = {(r, c): v for r, c, v in zip(heat[\"t\"], heat[\"q\"], heat[\"count\"])}\n"
        "    img = [[grid[(t, q)] for t in ts] for q in qs]\n"
        "    im = ax.imshow(img, aspect=\"auto\", origin=\"lower\",\n"
        "                   extent=[ts[0], ts[-1], qs[0], qs[-1]])\n"
        "    fig.colorbar(im, ax=ax); ax.set_xlabel(\"t\"); ax.set_ylabel(\"q\")\n"
        "    ax.set_title(\"path occupancy\")\n"
        "fig.tight_layout(); fig.savefig(os.path.join(HERE, \"as_compare.png\"), dpi=150)\n"
        "print(\"wrote as_compare.png\")\n";
}

const char* plot_impact_script() {
    return
        "d = load(\"impact.csv\")\n"
        "fit = load(\"impact_fit.csv\")\n"
        "fig, ax = plt.subplots(figsize=(6, 4))\n"
        "ax.plot(d[\"imbalance\"], d[\"delta_a_T\"], \".\", ms=4, label=\"terminal ask quote\")\n"
        "if fit:\n"
        "    c, b = fit[\"c\"][0], fit[\"beta\"][0]\n"
        "    xs = sorted(x for x in d[\"imbalance\"] if x > 0)\n"
        "    ax.plot(xs, [c * x ** b for x in xs], \"-\",\n"
        "            label=f\"fit c*x^beta (beta={b:.3f}, r2={fit['r2'][0]:.3f})\")\n"
        "ax.set_xlabel(\"order imbalance\"); ax.set_ylabel(\"delta_a(T)\"); ax.legend()\n"
        "fig.tight_layout(); fig.savefig(os.path.join(HERE, \"impact.png\"), dpi=150)\n"
        "print(\"wrote impact.png\")\n";
}

const char* plot_exec_script() {
    return
        "d = load(\"exec_trials.csv\")\n"
        "fig, ax = plt.subplots(figsize=(6, 4))\n"
        "for name in (\"twap\", \"vwap\", \"exploit\"):\n"
        "    ax.hist(d[name], bins=20, alpha=0.5, label=name)\n"
        "ax.set_xlabel(\"objective\"); ax.set_ylabel(\"trials\"); ax.legend()\n"
        "fig.tight_layout(); fig.savefig(os.path.join(HERE, \"exec_hist.png\"), dpi=150)\n"
        "print(\"wrote exec_hist.png\")\n";
}

std::string plot_script(const char* body) { return std::string(kPlotPreamble) + body; }

// ------------------------------------------------------------- subcommands

const std::vector<std::string> kFlowKeys = {
    "flow.mode", "flow.rate_a", "flow.rate_b", "flow.n", "flow.T", "flow.csv",
    "penalty.phi", "penalty.A"};

void append(std::vector<std::string>& dst, const std::vector<std::string>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

void cmd_riccati(const Config& cfg, OutputBundle& outp, std::ostream& log) {
    std::vector<std::string> keys = {"model.zeta", "model.gamma", "run.q0", "run.seed",
                                     "run.out_dir"};
    append(keys, kFlowKeys);
    cfg.restrict_keys(keys);

    const auto [flow, pen] = load_flow(cfg, 0.0, 0.0);
    const double zeta = cfg.number("model.zeta", 1.0);
    const double gamma = cfg.number("model.gamma", 1.0);
    const double q0 = cfg.number("run.q0", 0.0);

    const auto [field, traj] = solve_affine_fbsde(flow, pen, zeta, gamma, q0);
    const HSystem hsys = solve_h_system(flow, pen, zeta, gamma);

    std::ostringstream f;
    f << "t,P,H\n";
    for (std::size_t i = 0; i < field.times.size(); ++i)
        f << format_g17(field.times[i]) << ',' << format_g17(field.P[i]) << ','
          << format_g17(field.H[i]) << "\n";
    outp.add("affine_field.csv", f.str());

    std::ostringstream h;
    h << "t,h2,h1,h0\n";
    for (std::size_t i = 0; i < hsys.times.size(); ++i)
        h << format_g17(hsys.times[i]) << ',' << format_g17(hsys.h2[i]) << ','
          << format_g17(hsys.h1[i]) << ',' << format_g17(hsys.h0[i]) << "\n";
    outp.add("h_system.csv", h.str());

    std::ostringstream t;
    write_trajectory_csv(t, traj);
    outp.add("trajectory.csv", t.str());
    outp.add("plot_riccati.py", plot_script(plot_riccati_script()));

    log << "P(0) = " << format_g17(field.P.front()) << "\n";
    log << "Q(T) = " << format_g17(traj.Q.back()) << "\n";
    log << "delta_a(T) = " << format_g17(traj.delta_a.back()) << "\n";
    log << "objective = " << format_g17(traj.objective) << "\n";
}

void cmd_solve_hjb(const Config& cfg, OutputBundle& outp, std::ostream& log) {
    std::vector<std::string> keys = {
        "factor.kappa", "factor.mean", "factor.vol", "factor.l0",
        "grid.l_min", "grid.l_max", "grid.n_l", "grid.n_t", "grid.T",
        "model.zeta", "model.gamma", "run.theta", "run.seed", "run.out_dir"};
    for (const char* link : {"link_a", "link_b", "link_phi", "link_A"})
        for (const char* fld : {"offset", "slope", "lo", "hi"})
            keys.push_back(std::string(link) + "." + fld);
    cfg.restrict_keys(keys);

    OuFactor factor;
    factor.kappa = cfg.number("factor.kappa", 2.0);
    factor.mean = cfg.number("factor.mean", 0.0);
    factor.vol = cfg.number("factor.vol", 0.5);
    factor.l0 = cfg.number("factor.l0", 0.0);
    factor.link_a = load_link(cfg, "link_a", LinkFunction{10.0, 2.0, 5.0, 15.0});
    factor.link_b = load_link(cfg, "link_b", LinkFunction{10.0, -2.0, 5.0, 15.0});
    factor.link_phi = load_link(cfg, "link_phi", LinkFunction{0.05, 0.0, 0.05, 0.05});
    factor.link_A = load_link(cfg, "link_A", LinkFunction{0.05, 0.0, 0.05, 0.05});
    validate_factor(factor);

    FactorGrid grid;
    grid.l_min = cfg.number("grid.l_min", -2.0);
    grid.l_max = cfg.number("grid.l_max", 2.0);
    grid.n_l = static_cast<std::size_t>(cfg.integer("grid.n_l", 101));
    grid.n_t = static_cast<std::size_t>(cfg.integer("grid.n_t", 201));
    grid.T = cfg.number("grid.T", 1.0);

    const double zeta = cfg.number("model.zeta", 1.0);
    const double gamma = cfg.number("model.gamma", 1.0);
    const double theta = cfg.number("run.theta", 0.5);

    const HSurface h2s = solve_h2_pde(factor, grid, gamma, theta);
    const HSurface full = solve_h1_h0_pde(h2s, factor, zeta, gamma, theta);

    std::ostringstream s;
    write_h_surface_csv(s, full);
    outp.add("h_surface.csv", s.str());
    outp.add("plot_hjb.py", plot_script(plot_hjb_script()));

    const std::size_t mid = grid.n_l / 2;
    log << "h2(0, l=" << format_g17(full.l[mid]) << ") = " << format_g17(full.h2_at(0, mid))
        << "\n";
    log << "h1(0, same l) = " << format_g17(full.h1_at(0, mid)) << "\n";
    log << "h0(0, same l) = " << format_g17(full.h0_at(0, mid)) << "\n";
}

void cmd_solve_fbsde(const Config& cfg, OutputBundle& outp, std::ostream& log) {
    std::vector<std::string> keys = {"model.gamma", "model.xi",  "grid.n_q", "grid.n_t",
                                     "grid.q_min",  "grid.q_max", "run.q0",   "run.seed",
                                     "run.out_dir"};
    append(keys, kFlowKeys);
    cfg.restrict_keys(keys);

    const auto [flow, pen] = load_flow(cfg, 0.0, 0.0);
    const double gamma = cfg.number("model.gamma", 1.0);
    const double q0 = cfg.number("run.q0", 0.0);
    const IntensityModel model = ExponentialIntensity{gamma};
    const Truncation trunc = truncation_for(cfg, model, flow, pen, q0);

    const auto n_q = static_cast<std::size_t>(cfg.integer("grid.n_q", 801));
    const auto n_t_req = static_cast<std::size_t>(cfg.integer("grid.n_t", 0));
    const double q_min = cfg.number("grid.q_min", 0.0);
    const double q_max = cfg.number("grid.q_max", 0.0);

    QGrid grid;
    if (q_min < q_max) {
        if (n_t_req < 2)
            throw std::invalid_argument("grid.n_t is required alongside grid.q_min/q_max");
        grid = QGrid{q_min, q_max, n_q, n_t_req, flow.T()};
    } else {
        grid = auto_qgrid(flow, pen, model, model, trunc, q0, n_q,
                          std::max<std::size_t>(n_t_req, 401));
    }

    const DecouplingField field = solve_decoupling_field(flow, pen, model, model, trunc, grid);
    const Trajectory traj = forward_trajectory(field, flow, pen, model, model, trunc, q0);

    std::ostringstream f;
    write_field_csv(f, field);
    outp.add("field.csv", f.str());
    std::ostringstream t;
    write_trajectory_csv(t, traj);
    outp.add("trajectory.csv", t.str());
    outp.add("plot_fbsde.py", plot_script(plot_fbsde_script()));

    log << "grid: q in [" << format_g17(grid.q_min) << ", " << format_g17(grid.q_max)
        << "], n_q = " << grid.n_q << ", n_t = " << grid.n_t << "\n";
    log << "Q(T) = " << format_g17(traj.Q.back()) << "\n";
    log << "delta_a(T) = " << format_g17(traj.delta_a.back()) << "\n";
    log << "objective = " << format_g17(traj.objective) << "\n";
}

void cmd_as_compare(const Config& cfg, OutputBundle& outp, std::ostream& log) {
    cfg.restrict_keys({"as.lambda_a", "as.lambda_b", "as.sigma2_half", "as.A", "as.gamma",
                       "as.T", "compare.enabled", "compare.deltas", "compare.q_lo",
                       "compare.q_hi", "sim.enabled", "sim.delta", "sim.q0", "sim.n_paths",
                       "sim.n_steps", "sim.n_t", "sim.q_bound", "run.seed", "run.out_dir"});

    ASParams base;
    base.lambda_a = cfg.number("as.lambda_a", 10.0);
    base.lambda_b = cfg.number("as.lambda_b", 10.0);
    base.sigma = std::sqrt(2.0 * cfg.number("as.sigma2_half", 0.05));
    base.A = cfg.number("as.A", 0.05);
    base.gamma = cfg.number("as.gamma", 1.0);
    base.T = cfg.number("as.T", 1.0);

    const std::uint64_t seed = cfg.integer("run.seed", 1);
    bool wrote_any = false;

    if (cfg.integer("compare.enabled", 1) != 0) {
        const std::vector<double> deltas = cfg.number_list("compare.deltas", {1.0});
        const double q_lo = cfg.number("compare.q_lo", -10.0);
        const double q_hi = cfg.number("compare.q_hi", 10.0);
        const auto rows = compare_theta(base, deltas, q_lo, q_hi);

        std::ostringstream summary;
        summary << "delta,sup_gap\n";
        std::ostringstream detail;
        detail << "delta,q,theta_discrete,theta_macro\n";
        for (const auto& row : rows) {
            summary << format_g17(row.delta_size) << ',' << format_g17(row.sup_gap) << "\n";
            for (std::size_t k = 0; k < row.q.size(); ++k)
                detail << format_g17(row.delta_size) << ',' << format_g17(row.q[k]) << ','
                       << format_g17(row.theta_discrete[k]) << ','
                       << format_g17(row.theta_macro[k]) << "\n";
            log << "delta = " << format_g17(row.delta_size)
                << ": sup|theta - theta_macro| at t=0 is " << format_g17(row.sup_gap) << "\n";
        }
        outp.add("compare.csv", summary.str());
        outp.add("compare_detail.csv", detail.str());

        // Full surfaces for the first pitch, matching compare_theta's internal
        // resolutions, decimated in time for plotting.
        ASParams p0 = base;
        p0.delta_size = deltas.front();
        const double want = std::max(std::abs(q_lo), std::abs(q_hi)) + 5.0;
        p0.q_bound = std::ceil(want / p0.delta_size - 1e-9) * p0.delta_size;
        const ThetaSurface theta_d = solve_theta_discrete(p0, 1001);
        const auto n_macro =
            static_cast<std::size_t>(std::llround(2.0 * p0.q_bound / 0.05)) + 1;
        const QGrid mg{-p0.q_bound, p0.q_bound, n_macro, 2001, base.T};
        const ThetaSurface theta_m = solve_theta_macro(p0, mg);

        std::ostringstream td;
        write_theta_csv(td, decimate_theta(theta_d, 101));
        outp.add("theta_discrete.csv", td.str());
        std::ostringstream tm;
        write_theta_csv(tm, decimate_theta(theta_m, 101));
        outp.add("theta_macro.csv", tm.str());
        wrote_any = true;
    }

    if (cfg.integer("sim.enabled", 0) != 0) {
        ASParams ps = base;
        ps.delta_size = cfg.number("sim.delta", 1.0);
        const double q0 = cfg.number("sim.q0", 10.0);
        double q_bound = cfg.number("sim.q_bound", 0.0);
        if (q_bound <= 0) q_bound = std::max(3.0 * std::abs(q0), 3.0 * ps.delta_size);
        ps.q_bound = std::ceil(q_bound / ps.delta_size - 1e-9) * ps.delta_size;

        const auto n_t = static_cast<std::size_t>(cfg.integer("sim.n_t", 1001));
        const auto n_paths = static_cast<std::size_t>(cfg.integer("sim.n_paths", 500));
        const auto n_steps = static_cast<std::size_t>(cfg.integer("sim.n_steps", 2000));

        const ThetaSurface theta = solve_theta_discrete(ps, n_t);
        const SimResult sim = simulate_as_paths(theta, ps, q0, seed, n_paths, n_steps);

        std::ostringstream mp;
        write_mean_path_csv(mp, sim);
        outp.add("as_mean_path.csv", mp.str());
        std::ostringstream hm;
        write_heatmap_csv(hm, decimate_heatmap(sim, 201));
        outp.add("as_heatmap.csv", hm.str());

        const auto n_macro =
            static_cast<std::size_t>(std::llround(2.0 * ps.q_bound / 0.05)) + 1;
        const QGrid mg{-ps.q_bound, ps.q_bound, n_macro, 2001, base.T};
        const ThetaSurface theta_m = solve_theta_macro(ps, mg);
        const std::vector<double> macro_q = macro_inventory_path(theta_m, ps, q0);

        std::ostringstream mq;
        mq << "t,Q\n";
        for (std::size_t i = 0; i < theta_m.times.size(); ++i)
            mq << format_g17(theta_m.times[i]) << ',' << format_g17(macro_q[i]) << "\n";
        outp.add("as_macro_path.csv", mq.str());

        log << "simulated " << n_paths << " paths, mean Q(T) = "
            << format_g17(sim.mean_q.back()) << " (se " << format_g17(sim.std_err.back())
            << ")\n";
        log << "macro Q(T) = " << format_g17(macro_q.back()) << "\n";
        log << "max per-step fill probability = " << format_g17(sim.max_step_prob)
            << (sim.accuracy_warning ? "  [warning: exceeds 0.1, increase sim.n_steps]" : "")
            << "\n";
        log << "edge occupancy fraction = " << format_g17(sim.edge_fraction) << "\n";
        wrote_any = true;
    }

    if (!wrote_any)
        throw std::invalid_argument("nothing to do: compare.enabled and sim.enabled both 0");
    outp.add("plot_as.py", plot_script(plot_as_script()));
}

void cmd_impact_sweep(const Config& cfg, OutputBundle& outp, std::ostream& log) {
    std::vector<std::string> keys = {
        "flow.mean", "flow.spread", "sweep.step",  "sweep.count",  "sweep.targets",
        "sweep.realizations", "model.gamma", "model.xi", "grid.n_q", "grid.n_t",
        "run.q0", "run.seed", "run.out_dir"};
    append(keys, kFlowKeys);
    cfg.restrict_keys(keys);

    const std::string mode = cfg.text("flow.mode", "constant");
    if (mode != "constant" && mode != "random")
        throw std::invalid_argument("flow.mode must be 'constant' or 'random' for impact-sweep");

    const double T = cfg.number("flow.T", 1.0);
    const auto n = static_cast<std::size_t>(cfg.integer("flow.n", 201));
    const double phi = cfg.number("penalty.phi", 0.02);
    const double A = cfg.number("penalty.A", phi);
    const double gamma = cfg.number("model.gamma", 1.0);
    const double q0 = cfg.number("run.q0", 0.0);
    const IntensityModel model = ExponentialIntensity{gamma};

    std::vector<double> targets;
    if (cfg.has("sweep.targets")) {
        targets = cfg.number_list("sweep.targets", {});
    } else {
        const double step = cfg.number("sweep.step", 5.0);
        const auto count = static_cast<std::size_t>(cfg.integer("sweep.count", 20));
        for (std::size_t i = 0; i < count; ++i) targets.push_back(step * static_cast<double>(i));
    }
    if (targets.empty()) throw std::invalid_argument("sweep target list is empty");
    const double max_target = *std::max_element(targets.begin(), targets.end());

    QGrid tmpl;
    tmpl.n_q = static_cast<std::size_t>(cfg.integer("grid.n_q", 401));
    tmpl.n_t = static_cast<std::size_t>(cfg.integer("grid.n_t", 0));
    tmpl.T = T;

    auto sweep_one = [&](const FlowPath& base) {
        const PenaltyPath pen = constant_penalty(base, phi, A);
        const auto [int_a, int_b] = integrate_flow(base);
        const double max_scale = (max_target + int_b) / int_a;
        const Truncation trunc = truncation_for(cfg, model, base, pen, q0, max_scale);
        return impact_sweep(base, pen, model, model, trunc, tmpl, targets, q0);
    };

    std::ostringstream csv;
    std::vector<std::pair<double, double>> pooled;
    if (mode == "constant") {
        const FlowPath base = build_constant_flow(cfg.number("flow.rate_a", 10.0),
                                                  cfg.number("flow.rate_b", 10.0), n, T);
        const auto pts = sweep_one(base);
        csv << "imbalance,delta_a_T,Q_T\n";
        for (const auto& p : pts) {
            csv << format_g17(p.imbalance) << ',' << format_g17(p.delta_a_T) << ','
                << format_g17(p.Q_T) << "\n";
            if (p.imbalance > 0) pooled.emplace_back(p.imbalance, p.delta_a_T);
        }
        log << "swept " << pts.size() << " imbalance targets\n";
    } else {
        const double mean = cfg.number("flow.mean", 10.0);
        const double spread = cfg.number("flow.spread", 5.0);
        const auto reps = static_cast<std::size_t>(cfg.integer("sweep.realizations", 40));
        const std::uint64_t seed = cfg.integer("run.seed", 1);
        csv << "realization,imbalance,delta_a_T,Q_T\n";
        for (std::size_t r = 0; r < reps; ++r) {
            const FlowPath base = iid_flow(mix_seed(seed, r), mean, spread, n, T);
            const auto pts = sweep_one(base);
            for (const auto& p : pts) {
                csv << r << ',' << format_g17(p.imbalance) << ',' << format_g17(p.delta_a_T)
                    << ',' << format_g17(p.Q_T) << "\n";
                if (p.imbalance > 0) pooled.emplace_back(p.imbalance, p.delta_a_T);
            }
        }
        log << "swept " << targets.size() << " targets over " << reps << " realizations\n";
    }
    outp.add("impact.csv", csv.str());

    if (pooled.size() >= 3) {
        const PowerFit fit = power_fit(pooled);
        log << "power fit: delta_a_T ~ " << format_g17(fit.c) << " * x^" << format_g17(fit.beta)
            << "  (r2 = " << format_g17(fit.r2) << ")\n";
        std::ostringstream fs;
        fs << "c,beta,r2\n"
           << format_g17(fit.c) << ',' << format_g17(fit.beta) << ',' << format_g17(fit.r2)
           << "\n";
        outp.add("impact_fit.csv", fs.str());
    }
    outp.add("plot_impact.py", plot_script(plot_impact_script()));
}

void cmd_exec_eval(const Config& cfg, OutputBundle& outp, std::ostream& log) {
    cfg.restrict_keys({"exec.n_trials", "exec.q0_exec", "exec.imbalance", "exec.q0_mm",
                       "flow.mean", "flow.spread", "flow.n", "flow.T", "penalty.phi",
                       "penalty.A", "model.gamma", "grid.n_q", "run.seed", "run.out_dir"});

    ExecExperimentParams params;
    params.n_trials = static_cast<std::size_t>(cfg.integer("exec.n_trials", 100));
    params.seed = cfg.integer("run.seed", 1);
    params.gamma = cfg.number("model.gamma", 1.0);
    params.T = cfg.number("flow.T", 1.0);
    params.phi = cfg.number("penalty.phi", 0.04);
    params.A = cfg.number("penalty.A", 0.04);
    params.q0_mm = cfg.number("exec.q0_mm", 0.0);
    params.q0_exec = cfg.number("exec.q0_exec", 40.0);
    params.imbalance = cfg.number("exec.imbalance", 30.0);
    params.flow_mean = cfg.number("flow.mean", 10.0);
    params.flow_spread = cfg.number("flow.spread", 5.0);
    params.n_grid = static_cast<std::size_t>(cfg.integer("flow.n", 201));
    params.n_q = static_cast<std::size_t>(cfg.integer("grid.n_q", 400));

    const ExecSummary summary = run_exec_experiment(params);

    std::ostringstream trials;
    trials << "trial,twap,vwap,exploit\n";
    for (const auto& tr : summary.trials)
        trials << tr.trial << ',' << format_g17(tr.twap) << ',' << format_g17(tr.vwap) << ','
               << format_g17(tr.exploit_) << "\n";
    outp.add("exec_trials.csv", trials.str());

    std::ostringstream means;
    means << "strategy,mean_objective\n"
          << "twap," << format_g17(summary.mean_twap) << "\n"
          << "vwap," << format_g17(summary.mean_vwap) << "\n"
          << "exploit," << format_g17(summary.mean_exploit) << "\n";
    outp.add("exec_summary.csv", means.str());
    outp.add("plot_exec.py", plot_script(plot_exec_script()));

    log << "trials = " << summary.trials.size() << "\n";
    log << "mean objective, twap = " << format_g17(summary.mean_twap) << "\n";
    log << "mean objective, vwap = " << format_g17(summary.mean_vwap) << "\n";
    log << "mean objective, exploit = " << format_g17(summary.mean_exploit) << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"macroscopic market-making solvers and experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_val = 0;
    std::string out_override;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"riccati", "linear-intensity quoting via the affine adjoint ansatz"},
        {"solve-hjb", "factor-driven value coefficients h2/h1/h0 on an (t,l) lattice"},
        {"solve-fbsde", "exponential-intensity decoupling field and optimal trajectory"},
        {"as-compare", "discrete lattice vs macroscopic limit, plus path simulation"},
        {"impact-sweep", "terminal quote vs order imbalance, constant or random flows"},
        {"exec-eval", "liquidation schedule comparison against a quoting market maker"},
    };
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--seed", seed_val, "override run.seed");
        sub->add_option("--out", out_override, "override run.out_dir");
    }

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("mmq");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        err << "error: usage: " << e.what() << "\n";
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        Config cfg = Config::from_file(config_path);
        if (sub->count("--seed") > 0) cfg.set("run.seed", std::to_string(seed_val));
        if (sub->count("--out") > 0) cfg.set("run.out_dir", out_override);

        OutputBundle bundle;
        std::ostringstream log;
        const std::string name = sub->get_name();
        if (name == "riccati")
            cmd_riccati(cfg, bundle, log);
        else if (name == "solve-hjb")
            cmd_solve_hjb(cfg, bundle, log);
        else if (name == "solve-fbsde")
            cmd_solve_fbsde(cfg, bundle, log);
        else if (name == "as-compare")
            cmd_as_compare(cfg, bundle, log);
        else if (name == "impact-sweep")
            cmd_impact_sweep(cfg, bundle, log);
        else
            cmd_exec_eval(cfg, bundle, log);

        bundle.flush(cfg.text("run.out_dir", "."));
        out << log.str();
        for (const auto& [fname, content] : bundle.files) {
            (void)content;
            out << "wrote " << fname << "\n";
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        err << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        err << "error: numeric: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace mmq
