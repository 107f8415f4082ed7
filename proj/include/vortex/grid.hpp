#pragma once

#include <cmath>
#include <vector>

#include "error.hpp"

namespace vortex {

// r_k = a * ratio^k up to b; last node snapped onto b exactly.
inline std::vector<double> geometric_grid(double a, double b, double ratio) {
    if (!(a > 0) || !(b > a) || !(ratio > 1))
        throw error("geometric_grid: need 0 < a < b, ratio > 1");
    std::vector<double> r;
    double x = a;
    while (x < b) {
        r.push_back(x);
        x *= ratio;
    }
    r.push_back(b);
    if (r.size() >= 2 && r[r.size() - 2] > b * (1 - 1e-12))
        r.erase(r.end() - 2);   // avoid a degenerate last cell
    return r;
}

// n nodes exactly uniform in log r (what the differentiation stencils assume).
inline std::vector<double> log_uniform_grid(double a, double b, std::size_t n) {
    if (!(a > 0) || !(b > a) || n < 2)
        throw error("log_uniform_grid: need 0 < a < b, n >= 2");
    std::vector<double> r(n);
    double la = std::log(a), lb = std::log(b);
    for (std::size_t k = 0; k < n; ++k)
        r[k] = std::exp(la + (lb - la) * (double)k / (double)(n - 1));
    r.front() = a;
    r.back() = b;
    return r;
}

inline std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    if (n < 2) throw error("uniform_grid: n < 2");
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k)
        r[k] = a + (b - a) * (double)k / (double)(n - 1);
    r.back() = b;
    return r;
}

// Nodes accumulating at 0: r_k = (k/K)^beta, k = 0..K.  Used by the
// eigensolver mesh, where the eigenfunction behaves like r^gamma near 0.
inline std::vector<double> graded_grid(std::size_t K, double beta) {
    if (K < 2) throw error("graded_grid: K < 2");
    std::vector<double> r(K + 1);
    for (std::size_t k = 0; k <= K; ++k)
        r[k] = std::pow((double)k / (double)K, beta);
    r.back() = 1.0;
    return r;
}

} // namespace vortex
