#pragma once

#include <ostream>

namespace featsel {

inline constexpr const char* kVersion = "featsel 0.1.0";

/// Entry point of the `featsel` tool. Returns the process exit status:
/// 0 success, 1 usage or config error, 2 data error, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace featsel
