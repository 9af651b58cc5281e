#pragma once

namespace roughsheet {

inline constexpr const char* kVersion = "0.1.0";

// On-disk format versions; bumped only on incompatible layout changes.
inline constexpr int kShsFormatVersion = 1;
inline constexpr int kRshFormatVersion = 1;

}  // namespace roughsheet
