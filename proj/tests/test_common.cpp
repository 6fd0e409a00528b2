#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "mmq/common.hpp"

using namespace mmq;

TEST_CASE("uniform_grid covers endpoints exactly") {
    const auto g = uniform_grid(0.0, 1.0, 11);
    REQUIRE(g.size() == 11);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i)
        CHECK(g[i + 1] - g[i] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(uniform_grid(0.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(uniform_grid(1.0, 0.0, 5), std::invalid_argument);
}

TEST_CASE("trapezoid integrates linear functions exactly") {
    const auto t = uniform_grid(0.0, 2.0, 7);
    std::vector<double> f;
    for (double x : t) f.push_back(3.0 * x + 1.0);
    CHECK(trapezoid(t, f) == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("piecewise-linear square quadrature is exact where trapezoid is not") {
    // f(t) = t on [0,1]: int f^2 = 1/3.  With two nodes the trapezoid rule on
    // f^2 gives 1/2; the dedicated rule must return exactly 1/3.
    const std::vector<double> t{0.0, 1.0};
    const std::vector<double> f{0.0, 1.0};
    CHECK(integrate_square_pl(t, f) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(trapezoid(t, {0.0, 1.0}) == doctest::Approx(0.5));

    // Refinement must not change the exact value.
    const auto tf = uniform_grid(0.0, 1.0, 101);
    std::vector<double> ff;
    for (double x : tf) ff.push_back(x);
    CHECK(integrate_square_pl(tf, ff) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("weighted square quadrature matches closed form for linear weight") {
    // w(t) = t, f(t) = 1 - t on [0,1]: int t (1-t)^2 dt = 1/12.
    const auto t = uniform_grid(0.0, 1.0, 2);
    const std::vector<double> w{0.0, 1.0};
    const std::vector<double> f{1.0, 0.0};
    CHECK(integrate_weighted_square_pl(t, w, f) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
}

TEST_CASE("interp_linear clamps and interpolates") {
    const std::vector<double> xs{0.0, 1.0, 2.0};
    const std::vector<double> ys{0.0, 10.0, 0.0};
    CHECK(interp_linear(xs, ys, 0.5) == doctest::Approx(5.0));
    CHECK(interp_linear(xs, ys, 1.5) == doctest::Approx(5.0));
    CHECK(interp_linear(xs, ys, -3.0) == doctest::Approx(0.0));
    CHECK(interp_linear(xs, ys, 9.0) == doctest::Approx(0.0));
}

TEST_CASE("bracket_index stays in range") {
    const std::vector<double> xs{0.0, 1.0, 2.0, 3.0};
    CHECK(bracket_index(xs, -5.0) == 0);
    CHECK(bracket_index(xs, 0.5) == 0);
    CHECK(bracket_index(xs, 2.5) == 2);
    CHECK(bracket_index(xs, 99.0) == 2);
}

TEST_CASE("mix_seed separates substreams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t c = 0; c < 1000; ++c) seen.insert(mix_seed(42, c));
    CHECK(seen.size() == 1000);
    CHECK(mix_seed(42, 7) == mix_seed(42, 7));
    CHECK(mix_seed(42, 7) != mix_seed(43, 7));
}

TEST_CASE("format_g17 round-trips doubles") {
    for (double v : {0.1, 1.0 / 3.0, -2.718281828459045e-7, 12345.678901234567}) {
        const std::string s = format_g17(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("solve_tridiagonal solves a known system") {
    // [2 1 0; 1 2 1; 0 1 2] x = [4; 8; 8] -> x = [1, 2, 3].
    const std::vector<double> lo{0.0, 1.0, 1.0};
    const std::vector<double> diag{2.0, 2.0, 2.0};
    const std::vector<double> up{1.0, 1.0, 0.0};
    const std::vector<double> rhs{4.0, 8.0, 8.0};
    const auto x = solve_tridiagonal(lo, diag, up, rhs);
    REQUIRE(x.size() == 3);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(x[2] == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("rk4 grid helpers integrate dy/dt = y with fourth-order accuracy") {
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = y[0];
    };
    auto err_at = [&](std::size_t n) {
        const auto t = uniform_grid(0.0, 1.0, n);
        const auto sol = rk4_forward_grid(t, {1.0}, rhs);
        return std::abs(sol.back()[0] - std::exp(1.0));
    };
    const double e1 = err_at(11);
    const double e2 = err_at(21);
    CHECK(e1 / e2 > 8.0);   // order ~4 => ratio ~16
    CHECK(e1 / e2 < 32.0);

    // Backward sweep undoes the forward one.
    const auto t = uniform_grid(0.0, 1.0, 51);
    const auto fwd = rk4_forward_grid(t, {1.0}, rhs);
    const auto back = rk4_backward_grid(t, fwd.back(), rhs);
    CHECK(back.front()[0] == doctest::Approx(1.0).epsilon(1e-10));
}
