#pragma once

namespace sdelab {

inline constexpr const char* kToolVersion = "0.1.0";

#ifdef SDELAB_BUILD_ID
inline constexpr const char* kBuildId = SDELAB_BUILD_ID;
#else
inline constexpr const char* kBuildId = "unknown";
#endif

}  // namespace sdelab
