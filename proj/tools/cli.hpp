#pragma once

#include <iosfwd>

namespace dcm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

// Environment variable naming the root for relative output paths.
inline constexpr const char* kOutputRootEnv = "DCM_OUTPUT_ROOT";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dcm::cli
