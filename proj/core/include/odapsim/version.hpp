#pragma once

namespace odapsim {

inline constexpr const char* kVersion = "0.1.0";

} // namespace odapsim
