#pragma once

// Adaptive Dormand-Prince 5(4) with the standard 5th-order continuous
// extension.  The dense output matters: several downstream checks sample
// solutions on their own grids and differentiate numerically, so the
// interpolant has to carry the integrator's accuracy between nodes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "error.hpp"

namespace vortex {

template <std::size_t N>
using vec = std::array<double, N>;

namespace detail {

template <std::size_t N>
inline vec<N> axpy(const vec<N>& y, double h, const vec<N>& k) {
    vec<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = y[i] + h * k[i];
    return r;
}

} // namespace detail

template <std::size_t N>
class Trajectory {
public:
    // coefficients of the quartic interpolant on [t_j, t_{j+1}]:
    // y(theta) = c1 + th*(c2 + (1-th)*(c3 + th*(c4 + (1-th)*c5)))
    struct Cell {
        double t0, h;
        vec<N> c1, c2, c3, c4, c5;
    };

    std::vector<Cell> cells;

    double t_front() const { return cells.front().t0; }
    double t_back() const { return cells.back().t0 + cells.back().h; }

    vec<N> eval(double t) const {
        const Cell& c = locate(t);
        double th = (t - c.t0) / c.h;
        vec<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = c.c1[i] + th * (c.c2[i] + (1 - th) * (c.c3[i] + th * (c.c4[i] + (1 - th) * c.c5[i])));
        return y;
    }

    vec<N> deriv(double t) const {
        const Cell& c = locate(t);
        double th = (t - c.t0) / c.h;
        // d/dth of c2*th + c3*(th - th^2) + c4*(th^2 - th^3) + c5*(th^2 - 2 th^3 + th^4)
        double d3 = 1 - 2 * th;
        double d4 = th * (2 - 3 * th);
        double d5 = th * (2 - th * (6 - 4 * th));
        vec<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = (c.c2[i] + d3 * c.c3[i] + d4 * c.c4[i] + d5 * c.c5[i]) / c.h;
        return y;
    }

private:
    const Cell& locate(double t) const {
        if (cells.empty()) throw error("Trajectory: empty");
        auto it = std::upper_bound(cells.begin(), cells.end(), t,
                                   [](double x, const Cell& c) { return x < c.t0; });
        if (it != cells.begin()) --it;
        return *it;
    }
};

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;        // 0: pick from the first RHS evaluation
    std::size_t max_steps = 2'000'000;
};

// Integrates y' = f(t, y) from t0 to t1 (t1 > t0).  `watch`, if set, sees every
// accepted step (t, y) and returns false to stop early.
template <std::size_t N, class RHS>
Trajectory<N> integrate(RHS&& f, double t0, double t1, vec<N> y0,
                        const OdeOptions& opt = {},
                        const std::function<bool(double, const vec<N>&)>& watch = {}) {
    static constexpr double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
    static constexpr double a21 = 1. / 5;
    static constexpr double a31 = 3. / 40, a32 = 9. / 40;
    static constexpr double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
    static constexpr double a51 = 19372. / 6561, a52 = -25360. / 2187,
                            a53 = 64448. / 6561, a54 = -212. / 729;
    static constexpr double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247,
                            a64 = 49. / 176, a65 = -5103. / 18656;
    static constexpr double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192,
                            b5 = -2187. / 6784, b6 = 11. / 84;
    // y5 - y4 error weights
    static constexpr double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920,
                            e5 = -17253. / 339200, e6 = 22. / 525, e7 = -1. / 40;
    // 5th-order continuous-extension weights
    static constexpr double d1 = -12715105075. / 11282082432.,
                            d3 = 87487479700. / 32700410799.,
                            d4 = -10690763975. / 1880347072.,
                            d5 = 701980252875. / 199316789632.,
                            d6 = -1453857185. / 822651844.,
                            d7 = 69997945. / 29380423.;

    if (!(t1 > t0)) throw error("integrate: need t1 > t0");
    Trajectory<N> traj;
    traj.cells.reserve(256);

    double t = t0;
    vec<N> y = y0;
    vec<N> k1 = f(t, y);

    double h = opt.h_init;
    if (h <= 0) {
        double ynorm = 0;
        for (std::size_t i = 0; i < N; ++i) ynorm = std::max(ynorm, std::fabs(y[i]));
        double sc = 0;   // |y'| relative to the per-component error scale
        for (std::size_t i = 0; i < N; ++i)
            sc = std::max(sc, std::fabs(k1[i]) /
                                  (opt.atol + opt.rtol * std::max(std::fabs(y[i]), ynorm)));
        h = (sc > 0) ? 0.01 / sc : 1e-3 * (t1 - t0);
        h = std::clamp(h, 1e-10 * (t1 - t0), 0.1 * (t1 - t0));
    }

    using detail::axpy;
    std::size_t steps = 0;
    while (t < t1) {
        if (++steps > opt.max_steps) throw error("integrate: max step count exceeded");
        if (h < 1e-14 * std::max(1.0, std::fabs(t)))
            throw error("integrate: step size underflow");
        bool last = (t + h >= t1);
        if (last) h = t1 - t;

        vec<N> k2 = f(t + c2 * h, axpy(y, h * a21, k1));
        vec<N> y3;
        for (std::size_t i = 0; i < N; ++i) y3[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        vec<N> k3 = f(t + c3 * h, y3);
        vec<N> y4;
        for (std::size_t i = 0; i < N; ++i)
            y4[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        vec<N> k4 = f(t + c4 * h, y4);
        vec<N> y5;
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        vec<N> k5 = f(t + c5 * h, y5);
        vec<N> y6;
        for (std::size_t i = 0; i < N; ++i)
            y6[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        vec<N> k6 = f(t + h, y6);
        vec<N> ynew;
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        vec<N> k7 = f(t + h, ynew);   // FSAL

        double err = 0;
        for (std::size_t i = 0; i < N; ++i) {
            double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            double sc = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            err = std::max(err, std::fabs(e) / sc);
        }

        if (err <= 1.0) {
            typename Trajectory<N>::Cell cell;
            cell.t0 = t;
            cell.h = h;
            for (std::size_t i = 0; i < N; ++i) {
                double dy = ynew[i] - y[i];
                cell.c1[i] = y[i];
                cell.c2[i] = dy;
                cell.c3[i] = h * k1[i] - dy;
                cell.c4[i] = dy - h * k7[i] - cell.c3[i];
                cell.c5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                  d6 * k6[i] + d7 * k7[i]);
            }
            traj.cells.push_back(cell);
            t += h;
            y = ynew;
            k1 = k7;
            if (watch && !watch(t, y)) break;
            if (last) break;   // t1 reached up to roundoff
        }

        double fac = (err > 0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
        if (!last) h = std::min(h, t1 - t);
    }
    if (traj.cells.empty()) throw error("integrate: no steps accepted");
    return traj;
}

} // namespace vortex
