#pragma once

namespace refinery {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace refinery
