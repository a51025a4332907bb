#pragma once

namespace mgp {

inline constexpr const char* kVersion = "0.1.0";

// git-describe style build identifier, embedded into run manifests.
inline const char* build_version() {
#ifdef MGP_GIT_REV
  return "0.1.0+" MGP_GIT_REV;
#else
  return "0.1.0";
#endif
}

}  // namespace mgp
