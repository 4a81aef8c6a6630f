#pragma once

namespace matchsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace matchsim
