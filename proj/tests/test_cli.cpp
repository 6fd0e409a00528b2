#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmq/cli.hpp"
#include "mmq/config.hpp"

using namespace mmq;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        static const unsigned run_tag = std::random_device{}();
        path = fs::temp_directory_path() /
               fs::path("mmq_test_" + std::to_string(run_tag) + "_" +
                        std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path file(const std::string& name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream os(p);
        os << content;
        return p;
    }
};

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const char* kRiccatiCfg =
    "[run]\n"
    "out_dir = {OUT}\n"
    "q0 = 0.0\n"
    "[model]\n"
    "zeta = 1.0\n"
    "gamma = 1.0\n"
    "[flow]\n"
    "rate_a = 10.0\n"
    "rate_b = 0.0\n"
    "n = 401\n"
    "T = 1.0\n"
    "[penalty]\n"
    "phi = 0.0\n"
    "A = 0.05\n";

std::string riccati_cfg(const fs::path& out_dir) {
    std::string s = kRiccatiCfg;
    const std::string key = "{OUT}";
    s.replace(s.find(key), key.size(), out_dir.string());
    return s;
}

}  // namespace

TEST_CASE("config parser: sections, comments, types, and errors") {
    const auto cfg = Config::from_text(
        "# top comment\n"
        "[alpha]\n"
        "x = 1.5   # trailing comment\n"
        "name = hello world\n"
        "count = 12\n"
        "xs = 1, 2.5, -3\n"
        "[beta]\n"
        "x = 2.5\n");
    CHECK(cfg.number("alpha.x", 0.0) == doctest::Approx(1.5));
    CHECK(cfg.number("beta.x", 0.0) == doctest::Approx(2.5));
    CHECK(cfg.text("alpha.name", "") == "hello world");
    CHECK(cfg.integer("alpha.count", 0) == 12);
    const auto xs = cfg.number_list("alpha.xs", {});
    REQUIRE(xs.size() == 3);
    CHECK(xs[2] == doctest::Approx(-3.0));
    CHECK(cfg.number("alpha.missing", 9.0) == doctest::Approx(9.0));
    CHECK(cfg.has("alpha.x"));
    CHECK_FALSE(cfg.has("gamma.x"));
    CHECK_THROWS_AS(cfg.require_number("alpha.nope"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.number("alpha.name", 0.0), std::invalid_argument);

    CHECK_THROWS_AS(Config::from_text("[a]\nx = 1\nx = 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(Config::from_text("[a]\nno_equals_here\n"), std::invalid_argument);
    CHECK_THROWS_AS(Config::from_text("[a\nx = 1\n"), std::invalid_argument);
    // Keys before any section header are stored without a prefix.
    CHECK(Config::from_text("x = 1\n").has("x"));
}

TEST_CASE("config restrict_keys flags unknown keys") {
    auto cfg = Config::from_text("[a]\nx = 1\n[b]\ny = 2\n");
    CHECK_NOTHROW(cfg.restrict_keys({"a.x", "b.y"}));
    CHECK_THROWS_AS(cfg.restrict_keys({"a.x"}), std::invalid_argument);
}

TEST_CASE("cli: no arguments is a usage error on stderr") {
    const auto r = run({});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error: usage:", 0) == 0);
}

TEST_CASE("cli: --help succeeds") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("riccati") != std::string::npos);
    CHECK(r.out.find("exec-eval") != std::string::npos);
}

TEST_CASE("cli: missing config file is a config error and leaves no outputs") {
    TempDir tmp;
    const auto missing = (tmp.path / "nope.cfg").string();
    const auto r = run({"riccati", "--config", missing, "--out", (tmp.path / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error: config:", 0) == 0);
    CHECK_FALSE(fs::exists(tmp.path / "o"));
}

TEST_CASE("cli: unknown config key is rejected before any computation") {
    TempDir tmp;
    std::string cfg = riccati_cfg(tmp.path / "out");
    cfg += "[typo]\nstray = 1\n";
    const auto p = tmp.file("r.cfg", cfg);
    const auto r = run({"riccati", "--config", p.string()});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error: config:", 0) == 0);
    CHECK(r.err.find("typo.stray") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.path / "out"));
}

TEST_CASE("cli: riccati experiment writes its bundle and reruns byte-identically") {
    TempDir tmp;
    const auto out_dir = tmp.path / "out";
    const auto p = tmp.file("r.cfg", riccati_cfg(out_dir));
    const auto r1 = run({"riccati", "--config", p.string()});
    CHECK(r1.code == 0);
    CHECK(r1.err.empty());
    for (const char* name :
         {"affine_field.csv", "h_system.csv", "trajectory.csv", "plot_riccati.py"})
        CHECK(fs::exists(out_dir / name));
    // The one-sided linear-intensity run ends at the closed-form quote 2/3.
    CHECK(r1.out.find("delta_a(T)") != std::string::npos);
    CHECK(r1.out.find("0.666666") != std::string::npos);

    const std::string first = slurp(out_dir / "trajectory.csv");
    const auto r2 = run({"riccati", "--config", p.string()});
    CHECK(r2.code == 0);
    CHECK(slurp(out_dir / "trajectory.csv") == first);
}

TEST_CASE("cli: --out overrides the configured output directory") {
    TempDir tmp;
    const auto p = tmp.file("r.cfg", riccati_cfg(tmp.path / "ignored"));
    const auto forced = tmp.path / "forced";
    const auto r = run({"riccati", "--config", p.string(), "--out", forced.string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(forced / "affine_field.csv"));
    CHECK_FALSE(fs::exists(tmp.path / "ignored"));
}

TEST_CASE("cli: numeric failures exit with code 3") {
    TempDir tmp;
    // Explicit lattice far too coarse in time for its spatial resolution:
    // the CFL guard must trip and be reported as a numeric error.
    const auto p = tmp.file("f.cfg",
                            "[run]\nout_dir = " + (tmp.path / "o").string() +
                                "\nq0 = 0.0\n[model]\ngamma = 1.0\n"
                                "[flow]\nrate_a = 10.0\nrate_b = 0.0\nn = 101\nT = 1.0\n"
                                "[penalty]\nphi = 0.0\nA = 0.05\n"
                                "[grid]\nq_min = -8\nq_max = 8\nn_q = 4001\nn_t = 21\n");
    const auto r = run({"solve-fbsde", "--config", p.string()});
    CHECK(r.code == 3);
    CHECK(r.err.rfind("error: numeric:", 0) == 0);
    CHECK_FALSE(fs::exists(tmp.path / "o"));
}

TEST_CASE("cli: --seed override changes stochastic outputs deterministically") {
    TempDir tmp;
    const std::string base_cfg =
        "[run]\nout_dir = {OUT}\nseed = 1\n"
        "[model]\ngamma = 1.0\n"
        "[penalty]\nphi = 0.02\nA = 0.02\n"
        "[flow]\nmode = random\nmean = 10\nspread = 5\nn = 101\nT = 1\n"
        "[sweep]\ntargets = 5, 10\nrealizations = 2\n"
        "[grid]\nn_q = 200\n";
    auto mk = [&](const std::string& sub) {
        std::string s = base_cfg;
        s.replace(s.find("{OUT}"), 5, (tmp.path / sub).string());
        return tmp.file(sub + ".cfg", s);
    };
    const auto p1 = mk("a");
    const auto p2 = mk("b");
    const auto p3 = mk("c");
    CHECK(run({"impact-sweep", "--config", p1.string()}).code == 0);
    CHECK(run({"impact-sweep", "--config", p2.string()}).code == 0);
    CHECK(run({"impact-sweep", "--config", p3.string(), "--seed", "99"}).code == 0);
    const auto ca = slurp(tmp.path / "a" / "impact.csv");
    const auto cb = slurp(tmp.path / "b" / "impact.csv");
    const auto cc = slurp(tmp.path / "c" / "impact.csv");
    CHECK(ca == cb);   // same seed: identical draws
    CHECK(ca != cc);   // overridden seed: different draws
}

TEST_CASE("cli: unknown subcommand is a usage error") {
    const auto r = run({"frobnicate", "--config", "x.cfg"});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error: usage:", 0) == 0);
}
