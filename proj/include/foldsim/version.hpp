#pragma once

namespace foldsim {

inline constexpr const char* kVersion = "0.1.0";

} // namespace foldsim
