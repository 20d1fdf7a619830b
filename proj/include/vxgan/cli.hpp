#pragma once

namespace vxgan {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNonFinite = 3;
/// grad-check ran but the error bound was exceeded.
inline constexpr int kExitCheckFailed = 4;

int run_cli(int argc, char** argv);

}  // namespace vxgan
