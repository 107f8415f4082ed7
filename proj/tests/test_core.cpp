#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vortex/fd.hpp"
#include "vortex/grid.hpp"
#include "vortex/ode.hpp"
#include "vortex/quadrature.hpp"

using namespace vortex;

TEST_CASE("geometric grid covers the interval", "[grid]") {
    auto r = geometric_grid(1e-6, 0.5, 1.05);
    REQUIRE(r.front() == 1e-6);
    REQUIRE(r.back() == 0.5);
    for (std::size_t i = 1; i < r.size(); ++i) {
        REQUIRE(r[i] > r[i - 1]);
        if (i + 1 < r.size())
            REQUIRE(r[i] / r[i - 1] == Catch::Approx(1.05).margin(1e-12));
    }
}

TEST_CASE("graded grid endpoints and monotonicity", "[grid]") {
    auto r = graded_grid(100, 3.0);
    REQUIRE(r.size() == 101);
    REQUIRE(r.front() == 0.0);
    REQUIRE(r.back() == 1.0);
    for (std::size_t i = 1; i < r.size(); ++i) REQUIRE(r[i] > r[i - 1]);
}

TEST_CASE("GL4 exact through degree 7", "[quadrature]") {
    auto f = [](double x) { return x * x * x * x * x * x * x; };   // x^7
    REQUIRE(gauss4(f, 0.0, 1.0) == Catch::Approx(1.0 / 8).epsilon(1e-14));
    auto g = [](double x) { return 1.0 / x; };
    REQUIRE(gauss4_cells(g, 1.0, 2.0, 32) == Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("dopri5 integrates exponential decay", "[ode]") {
    auto rhs = [](double, const vec<1>& y) { return vec<1>{ -y[0] }; };
    OdeOptions opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-14;
    auto traj = integrate<1>(rhs, 0.0, 5.0, { 1.0 }, opt);
    REQUIRE(traj.eval(5.0)[0] == Catch::Approx(std::exp(-5.0)).epsilon(1e-9));
    // dense output between nodes
    for (double t = 0.1; t < 5.0; t += 0.37)
        REQUIRE(traj.eval(t)[0] == Catch::Approx(std::exp(-t)).epsilon(1e-8));
    // derivative of the interpolant
    REQUIRE(traj.deriv(2.5)[0] == Catch::Approx(-std::exp(-2.5)).epsilon(1e-7));
}

TEST_CASE("dopri5 oscillator accuracy scales with rtol", "[ode]") {
    auto rhs = [](double, const vec<2>& y) { return vec<2>{ y[1], -y[0] }; };
    auto run = [&](double rtol) {
        OdeOptions opt;
        opt.rtol = rtol;
        opt.atol = 1e-15;
        auto traj = integrate<2>(rhs, 0.0, 20.0, { 1.0, 0.0 }, opt);
        auto y = traj.eval(20.0);
        return std::fabs(y[0] - std::cos(20.0)) + std::fabs(y[1] + std::sin(20.0));
    };
    double e_loose = run(1e-6), e_tight = run(1e-11);
    REQUIRE(e_tight < 1e-9);
    REQUIRE(e_loose / std::max(e_tight, 1e-16) > 50.0);
}

TEST_CASE("watch callback stops integration early", "[ode]") {
    auto rhs = [](double, const vec<1>& y) { return vec<1>{ y[0] }; };
    auto traj = integrate<1>(rhs, 0.0, 10.0, { 1.0 }, {},
                             [](double, const vec<1>& y) { return y[0] < 100.0; });
    REQUIRE(traj.t_back() < 10.0);
    REQUIRE(traj.eval(traj.t_back())[0] >= 100.0);
}

TEST_CASE("order-6 stencils differentiate smooth samples", "[fd]") {
    std::size_t n = 200;
    double h = 0.01;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::sin(h * (double)i);
    auto d1 = fd_deriv1(y, h);
    auto d2 = fd_deriv2(y, h);
    for (std::size_t i = 3; i + 3 < n; ++i) {
        double t = h * (double)i;
        REQUIRE(std::fabs(d1[i] - std::cos(t)) < 1e-11);
        REQUIRE(std::fabs(d2[i] + std::sin(t)) < 1e-9);
    }
}

TEST_CASE("log-grid chain rule reproduces power-law derivatives", "[fd]") {
    auto r = log_uniform_grid(0.1, 10.0, 240);
    std::vector<double> y(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) y[i] = std::pow(r[i], 3);
    auto d = log_grid_derivs(r, y);
    for (std::size_t i = d.lo; i <= d.hi; ++i) {
        REQUIRE(d.y_r[i] == Catch::Approx(3 * r[i] * r[i]).epsilon(1e-9));
        REQUIRE(d.y_rr[i] == Catch::Approx(6 * r[i]).epsilon(1e-8));
    }
}
