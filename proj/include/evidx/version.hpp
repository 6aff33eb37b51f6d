#pragma once

namespace evidx {

#ifndef EVIDX_GIT_HASH
#define EVIDX_GIT_HASH "unknown"
#endif

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kGitHash = EVIDX_GIT_HASH;

}  // namespace evidx
