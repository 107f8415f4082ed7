#pragma once

// Parameter bundle for the linearized vortex system.  A Fourier mode n >= 1
// around a degree-d vortex couples components with singular exponents
// gamma1 = |n - d| and gamma2 = n + d at r = 0; the generic (gamma1, gamma2)
// pair is kept free so bases can be studied off the physical line too.

#include <cmath>

#include "error.hpp"

namespace vortex {

struct ModeParams {
    double d = 0;
    double gamma1 = 0, gamma2 = 0;
    double gamma_sq = 0;   // (g1^2 + g2^2)/2
    double xi_sq = 0;      // (g2^2 - g1^2)/2
    double n = 0;          // sqrt(gamma_sq - d^2), the far polynomial exponent

    // admissible parameter sets for the constructions at 0
    bool in_domain = false;    // d >= 1, g2 > 1, 0 <= g1 <= g2 < g1 + 2d + 2
    bool in_domain1 = false;   // in_domain and g1 > 0
    bool in_domain2 = false;   // in_domain, g1 < 1/4, g1+g2 < 2d+2, g2 < 2d+1

    double resonance() const { return gamma1 + gamma2 - 2 * d - 2; }
};

inline ModeParams make_params(double d, double gamma1, double gamma2) {
    if (!(d > 0) || !(gamma1 >= 0) || !(gamma2 > 0))
        throw error("make_params: need d > 0, gamma1 >= 0, gamma2 > 0");
    ModeParams mp;
    mp.d = d;
    mp.gamma1 = gamma1;
    mp.gamma2 = gamma2;
    mp.gamma_sq = (gamma1 * gamma1 + gamma2 * gamma2) / 2;
    mp.xi_sq = (gamma2 * gamma2 - gamma1 * gamma1) / 2;
    if (!(mp.gamma_sq > d * d))
        throw error("make_params: need (gamma1^2 + gamma2^2)/2 > d^2");
    mp.n = std::sqrt(mp.gamma_sq - d * d);
    mp.in_domain = d >= 1 && gamma2 > 1 && gamma1 <= gamma2 &&
                   gamma2 < gamma1 + 2 * d + 2;
    mp.in_domain1 = mp.in_domain && gamma1 > 0;
    mp.in_domain2 = mp.in_domain && gamma1 < 0.25 &&
                    gamma1 + gamma2 < 2 * d + 2 && gamma2 < 2 * d + 1;
    return mp;
}

// the physical mode: exponents |n-d| and n+d
inline ModeParams mode_params(double d, double n) {
    if (!(n > 0)) throw error("mode_params: need n > 0");
    return make_params(d, std::fabs(n - d), n + d);
}

// Auxiliary comparison weights for the subdominant components of the decaying
// zero-side branches.  Each switches to its logarithmic form exactly at the
// degenerate denominator, with a threshold window where the closed forms
// agree to roundoff.
inline constexpr double resonance_eps = 1e-8;

struct SpecialWeights {
    double theta, theta_tilde, tau;
};

inline SpecialWeights special_weights(const ModeParams& mp, double r) {
    if (!(r > 0) || r > 1)
        throw error("special_weights: need 0 < r <= 1");
    SpecialWeights w{};
    double res = mp.resonance();
    if (std::fabs(res) < resonance_eps) {
        w.theta = -std::pow(r, mp.gamma1 - 2) * std::log(r);
        w.theta_tilde = -std::pow(r, mp.gamma2 - 2) * std::log(r);
    } else {
        w.theta = (-std::pow(r, mp.gamma1 - 2) +
                   std::pow(r, -mp.gamma2 + 2 * mp.d)) / res;
        w.theta_tilde = (-std::pow(r, mp.gamma2 - 2) +
                         std::pow(r, -mp.gamma1 + 2 * mp.d)) / res;
    }
    if (mp.gamma1 < resonance_eps) {
        w.tau = -std::log(r);
    } else {
        w.tau = (std::pow(r, -mp.gamma1) - std::pow(r, mp.gamma1)) /
                (2 * mp.gamma1);
    }
    return w;
}

} // namespace vortex
