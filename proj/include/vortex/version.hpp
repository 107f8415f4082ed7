#pragma once

namespace vortex {
inline constexpr const char* version = "0.1.0";
}
