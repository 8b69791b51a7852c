#pragma once

#include <string_view>

namespace qerase {

inline constexpr std::string_view kVersion = "0.1.0";

// Version tag written into trace headers and machine documents so that
// downstream commands can self-validate their inputs.
inline constexpr int kFormatVersion = 1;

}  // namespace qerase
