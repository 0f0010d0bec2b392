#pragma once

namespace fadcap {

inline constexpr const char* kToolName = "fadcap";
inline constexpr const char* kVersion = "1.0.0";

}  // namespace fadcap
