#pragma once

namespace restain {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace restain
