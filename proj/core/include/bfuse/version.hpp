#pragma once

namespace bfuse {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace bfuse
