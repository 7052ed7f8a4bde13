#pragma once

namespace mewpt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mewpt
