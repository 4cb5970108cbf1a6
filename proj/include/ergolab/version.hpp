#pragma once

namespace ergolab {
inline constexpr const char* kVersion = "0.1.0";
}
