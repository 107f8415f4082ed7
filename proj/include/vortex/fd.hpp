#pragma once

// Order-6 central finite differences on uniform grids, and chain-rule wrappers
// for geometric (uniform-in-log-r) grids.  Residual checks differentiate raw
// solution samples with these stencils instead of trusting any derivative the
// solver itself reports -- otherwise a residual test would just re-derive the
// solver's algebra and always pass.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "error.hpp"

namespace vortex {

// First derivative, 7-point order-6 central stencil.  Edge entries (3 on each
// side) are NaN; callers iterate the interior.
inline std::vector<double> fd_deriv1(const std::vector<double>& y, double h) {
    std::size_t n = y.size();
    std::vector<double> d(n, std::numeric_limits<double>::quiet_NaN());
    if (n < 7) throw error("fd_deriv1: need at least 7 samples");
    for (std::size_t i = 3; i + 3 < n; ++i)
        d[i] = (-y[i - 3] / 60 + 3 * y[i - 2] / 20 - 3 * y[i - 1] / 4
                + 3 * y[i + 1] / 4 - 3 * y[i + 2] / 20 + y[i + 3] / 60) / h;
    return d;
}

inline std::vector<double> fd_deriv2(const std::vector<double>& y, double h) {
    std::size_t n = y.size();
    std::vector<double> d(n, std::numeric_limits<double>::quiet_NaN());
    if (n < 7) throw error("fd_deriv2: need at least 7 samples");
    for (std::size_t i = 3; i + 3 < n; ++i)
        d[i] = (y[i - 3] / 90 - 3 * y[i - 2] / 20 + 3 * y[i - 1] / 2 - 49 * y[i] / 18
                + 3 * y[i + 1] / 2 - 3 * y[i + 2] / 20 + y[i + 3] / 90) / (h * h);
    return d;
}

// Derivatives in r of samples living on a geometric grid r_k = r_0 * q^k
// (so uniform in t = log r):  y_r = y_t / r,  y_rr = (y_tt - y_t) / r^2.
struct LogGridDerivs {
    std::vector<double> r, y, y_r, y_rr;
    std::size_t lo = 3, hi = 0;   // valid interior index range [lo, hi]
};

inline LogGridDerivs log_grid_derivs(const std::vector<double>& r,
                                     const std::vector<double>& y) {
    if (r.size() != y.size() || r.size() < 7)
        throw error("log_grid_derivs: bad sizes");
    double h = std::log(r[1] / r[0]);
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        double hi_ = std::log(r[i + 1] / r[i]);
        if (std::fabs(hi_ - h) > 1e-9 * std::fabs(h))
            throw error("log_grid_derivs: grid not geometric");
    }
    LogGridDerivs out;
    out.r = r;
    out.y = y;
    auto yt = fd_deriv1(y, h);
    auto ytt = fd_deriv2(y, h);
    out.y_r.resize(r.size());
    out.y_rr.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        out.y_r[i] = yt[i] / r[i];
        out.y_rr[i] = (ytt[i] - yt[i]) / (r[i] * r[i]);
    }
    out.lo = 3;
    out.hi = r.size() - 4;
    return out;
}

// Sup norm of res(i) over the valid interior of a stencil result.
template <class F>
double interior_sup(std::size_t lo, std::size_t hi, F&& res) {
    double m = 0;
    for (std::size_t i = lo; i <= hi; ++i)
        m = std::max(m, std::fabs(res(i)));
    return m;
}

} // namespace vortex
