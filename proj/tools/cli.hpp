#pragma once

#include <iosfwd>

namespace mmr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // validation failure, unreadable input, no path
inline constexpr int kExitUsage = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmr::cli
