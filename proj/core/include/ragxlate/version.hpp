#pragma once

namespace ragxlate {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ragxlate
