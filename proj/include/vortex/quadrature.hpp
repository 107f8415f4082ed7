#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace vortex {

// 4-point Gauss-Legendre on [-1, 1]; exact through degree 7.
struct GL4 {
    static constexpr std::size_t n = 4;
    // nodes +-sqrt(3/7 -+ (2/7) sqrt(6/5)), weights (18 +- sqrt(30)) / 36
    static const std::array<double, 4>& nodes() {
        static const std::array<double, 4> x = {
            -0.86113631159405257522, -0.33998104358485626480,
             0.33998104358485626480,  0.86113631159405257522 };
        return x;
    }
    static const std::array<double, 4>& weights() {
        static const std::array<double, 4> w = {
            0.34785484513745385737, 0.65214515486254614263,
            0.65214515486254614263, 0.34785484513745385737 };
        return w;
    }
};

template <class F>
double gauss4(F&& f, double a, double b) {
    const auto& x = GL4::nodes();
    const auto& w = GL4::weights();
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0;
    for (std::size_t i = 0; i < 4; ++i)
        s += w[i] * f(mid + half * x[i]);
    return half * s;
}

template <class F>
double gauss4_cells(F&& f, double a, double b, std::size_t cells) {
    double s = 0, h = (b - a) / (double)cells;
    for (std::size_t c = 0; c < cells; ++c)
        s += gauss4(f, a + h * (double)c, a + h * (double)(c + 1));
    return s;
}

} // namespace vortex
