#pragma once

// First-order form of the coupled pair of radial equations linearized around
// a vortex profile f:
//
//   a'' + a'/r - gamma1^2 a/r^2 + (1 - 2 f^2) a - f^2 b = 0
//   b'' + b'/r - gamma2^2 b/r^2 + (1 - 2 f^2) b - f^2 a = 0
//
// in the state X = (a, r a', b, r b').  The coefficient matrix is trace
// free, so the determinant of any four solutions is constant in r; and the
// system is formally self-adjoint, so the bilinear bracket of two solutions
// is constant as well.  Both serve as running accuracy checks.
//
// In sum/difference variables x = a + b, y = a - b the system decouples its
// potential terms:
//
//   x'' + x'/r = (gamma^2 x - xi^2 y)/r^2 - (1 - 3 f^2) x
//   y'' + y'/r = (gamma^2 y - xi^2 x)/r^2 - (1 - f^2) y
//
// which is the form used by the far-field constructions.

#include <array>
#include <cmath>

#include "error.hpp"
#include "mode_params.hpp"
#include "ode.hpp"
#include "profile.hpp"

namespace vortex {

using State = std::array<double, 4>;   // (a, r a', b, r b')

inline State system_rhs(const ModeParams& mp, double f2, double r,
                        const State& X) {
    double diag = -r * (1 - 2 * f2);
    return {X[1] / r,
            (diag + mp.gamma1 * mp.gamma1 / r) * X[0] + r * f2 * X[2],
            X[3] / r,
            (diag + mp.gamma2 * mp.gamma2 / r) * X[2] + r * f2 * X[0]};
}

// dense-output solution of X' = M(r) X between two radii (either direction)
struct PropagatedSolution {
    Trajectory<4> traj;
    bool reversed = false;   // integrated in s = -r
    double r_from = 0, r_to = 0;

    State eval(double r) const { return traj.eval(reversed ? -r : r); }
    State end() const { return eval(r_to); }
};

inline PropagatedSolution propagate(const Profile& prof, const ModeParams& mp,
                                    const State& X0, double r_from, double r_to,
                                    OdeOptions opt = {}) {
    if (!(r_from > 0) || !(r_to > 0) || r_from == r_to)
        throw error("propagate: need distinct positive radii");
    PropagatedSolution out;
    out.r_from = r_from;
    out.r_to = r_to;
    out.reversed = r_to < r_from;
    if (!out.reversed) {
        auto rhs = [&](double r, const State& X) {
            double f = prof.f(r);
            return system_rhs(mp, f * f, r, X);
        };
        out.traj = integrate<4>(rhs, r_from, r_to, X0, opt);
    } else {
        // the integrator only runs forward; flip the axis.  The state keeps
        // its meaning (slopes stay d/dr), only the parameter reverses, so the
        // whole right side changes sign and the components do not.
        auto rhs = [&](double s, const State& X) {
            double r = -s;
            double f = prof.f(r);
            State g = system_rhs(mp, f * f, r, X);
            return State{-g[0], -g[1], -g[2], -g[3]};
        };
        out.traj = integrate<4>(rhs, -r_from, -r_to, X0, opt);
    }
    return out;
}

// determinant of four solution columns; constant in r for exact solutions
inline double frame_det(const std::array<State, 4>& cols) {
    auto& c = cols;
    auto m3 = [&](int r0, int r1, int r2, int c0, int c1, int c2) {
        return c[c0][r0] * (c[c1][r1] * c[c2][r2] - c[c2][r1] * c[c1][r2]) -
               c[c1][r0] * (c[c0][r1] * c[c2][r2] - c[c2][r1] * c[c0][r2]) +
               c[c2][r0] * (c[c0][r1] * c[c1][r2] - c[c1][r1] * c[c0][r2]);
    };
    return c[0][0] * m3(1, 2, 3, 1, 2, 3) - c[1][0] * m3(1, 2, 3, 0, 2, 3) +
           c[2][0] * m3(1, 2, 3, 0, 1, 3) - c[3][0] * m3(1, 2, 3, 0, 1, 2);
}

// r (a1' a2 - a2' a1 + b1' b2 - b2' b1); constant in r for two solutions
inline double pair_bracket(const State& X1, const State& X2) {
    return X1[1] * X2[0] - X2[1] * X1[0] + X1[3] * X2[2] - X2[3] * X1[2];
}

} // namespace vortex
