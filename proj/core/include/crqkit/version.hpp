#pragma once

namespace crqkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace crqkit
