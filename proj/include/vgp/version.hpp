#pragma once

namespace vgp {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace vgp
