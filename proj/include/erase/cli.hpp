#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace erase::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kStreamError = 3;

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace erase::cli
