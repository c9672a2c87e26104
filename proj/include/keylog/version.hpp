#pragma once

namespace keylog {
inline constexpr const char* kVersion = "0.1.0";
}
