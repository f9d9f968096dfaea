#pragma once

namespace entangle {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace entangle
