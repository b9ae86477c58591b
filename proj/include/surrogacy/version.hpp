#pragma once

#include <string_view>

namespace surrogacy {

inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace surrogacy
