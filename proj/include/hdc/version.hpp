#pragma once

namespace hdc {

inline constexpr const char* kVersion = "hdckit-0.1.0";

}  // namespace hdc
