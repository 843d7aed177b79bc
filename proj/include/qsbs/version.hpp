#pragma once

namespace qsbs {

inline constexpr const char* kToolName = "qsbsreg";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace qsbs
