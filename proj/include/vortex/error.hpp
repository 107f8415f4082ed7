#pragma once

#include <stdexcept>
#include <string>

namespace vortex {

// Hard numerical failures (step-size underflow, broken bracket, non-contraction...).
// Everything recoverable is reported through result structs instead.
struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

struct non_contraction : error {
    using error::error;
};
struct quadrature_failure : error {
    using error::error;
};
struct degenerate_basis : error {
    using error::error;
};
struct ill_conditioned : error {
    using error::error;
};

} // namespace vortex
