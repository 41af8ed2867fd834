#pragma once

namespace cyto {

inline constexpr const char* kVersion = "0.1.0";

} // namespace cyto
