#pragma once

namespace rbb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rbb
