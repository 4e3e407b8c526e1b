#pragma once

namespace sentalign {

inline constexpr const char* kToolName = "sentalign";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace sentalign
