#pragma once

namespace circlemap {
inline constexpr const char* version = "0.1.0";
}
