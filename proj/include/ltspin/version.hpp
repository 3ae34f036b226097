#pragma once

#include <string_view>

namespace ltspin {

inline constexpr std::string_view kProjectName = "ltspin";
inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace ltspin
