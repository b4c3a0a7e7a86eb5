#pragma once

namespace bison::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 internal error, 2 invalid input or usage.
int run(int argc, char** argv);

} // namespace bison::cli
