#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vortex/mode_params.hpp"

using namespace vortex;

TEST_CASE("mode exponents and invariants", "[modes]") {
    auto mp = mode_params(2.0, 1.0);
    CHECK(mp.gamma1 == Catch::Approx(1.0));
    CHECK(mp.gamma2 == Catch::Approx(3.0));
    CHECK(mp.gamma_sq == Catch::Approx(5.0));
    CHECK(mp.xi_sq == Catch::Approx(4.0));
    CHECK(mp.n == Catch::Approx(1.0).epsilon(1e-14));

    // generic exponents round-trip the same derived quantities
    auto raw = make_params(2.0, 1.0, 3.0);
    CHECK(raw.n == Catch::Approx(mp.n));
    CHECK(raw.xi_sq == Catch::Approx(mp.xi_sq));

    // mean square exponent must clear d^2 for the far polynomial rate to exist
    CHECK_THROWS_AS(make_params(2.0, 0.5, 1.5), error);
    CHECK_THROWS_AS(mode_params(1.0, -1.0), error);
}

TEST_CASE("admissible sets", "[modes]") {
    auto a = mode_params(1.0, 1.0);   // exponents 0 and 2
    CHECK(a.in_domain);
    CHECK_FALSE(a.in_domain1);
    CHECK(a.in_domain2);

    auto b = make_params(1.0, 2.0, 3.0);
    CHECK(b.in_domain);
    CHECK(b.in_domain1);
    CHECK_FALSE(b.in_domain2);

    // upper gap closed: g2 = g1 + 2d + 2 excluded
    auto c = make_params(1.0, 3.0, 7.0);
    CHECK_FALSE(c.in_domain);

    auto e = make_params(0.95, 1.0, 2.0);
    CHECK_FALSE(e.in_domain);
}

TEST_CASE("comparison weights: closed forms and degenerate branches", "[modes]") {
    // resonant exponent sum: theta picks up the log
    auto res = make_params(1.0, 1.5, 2.5);
    REQUIRE(std::fabs(res.resonance()) < 1e-14);
    double r = std::exp(-1.0);
    auto w = special_weights(res, r);
    CHECK(w.theta == Catch::Approx(std::exp(0.5)).epsilon(1e-13));
    CHECK(w.theta_tilde == Catch::Approx(std::exp(-0.5)).epsilon(1e-13));

    // away from resonance, the two-power form
    auto mp = make_params(1.0, 1.0, 2.0);
    auto v = special_weights(mp, 0.3);
    double den = mp.resonance();
    CHECK(v.theta ==
          Catch::Approx((-std::pow(0.3, -1.0) + std::pow(0.3, 0.0)) / den));
    CHECK(v.tau == Catch::Approx((std::pow(0.3, -1.0) - 0.3) / 2));

    // tau vanishes at the outer end and degenerates to -log r with the gap
    CHECK(special_weights(mp, 1.0).tau == Catch::Approx(0.0).margin(1e-15));
    auto flat = mode_params(1.0, 1.0);   // gamma1 = 0
    CHECK(special_weights(flat, 0.2).tau ==
          Catch::Approx(-std::log(0.2)).epsilon(1e-13));

    CHECK_THROWS_AS(special_weights(mp, 1.5), error);
}

TEST_CASE("weights are continuous across the branch thresholds", "[modes]") {
    // gamma1 just above / below the log threshold
    double r = 0.37;
    auto lo = make_params(1.0, 2e-8, 2.0);
    auto hi = make_params(1.0, 2e-9, 2.0);
    CHECK(special_weights(lo, r).tau ==
          Catch::Approx(special_weights(hi, r).tau).epsilon(1e-6));

    // resonance denominator just above / below threshold
    auto near = make_params(1.0, 1.5, 2.5 + 3e-8);
    auto at = make_params(1.0, 1.5, 2.5);
    CHECK(special_weights(near, r).theta ==
          Catch::Approx(special_weights(at, r).theta).epsilon(1e-6));
    CHECK(special_weights(near, r).theta_tilde ==
          Catch::Approx(special_weights(at, r).theta_tilde).epsilon(1e-6));
}
