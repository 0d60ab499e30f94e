#pragma once

namespace embodepth {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace embodepth
