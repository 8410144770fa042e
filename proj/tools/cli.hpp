#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace costplan::cli {

// Exit codes: 0 success, 1 model-level infeasibility or error,
// 2 usage, validation or I/O failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitModel = 1;
inline constexpr int kExitUsage = 2;

const char* version() noexcept;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace costplan::cli
