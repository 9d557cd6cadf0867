#pragma once

namespace perfospec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace perfospec
