#pragma once

namespace splitree {
inline constexpr const char* kVersion = "0.1.0";
}
