#pragma once

#include <ostream>

namespace qsn {

/// Entry point of the `qsn` tool. Returns the process exit code:
/// 0 success, 2 invalid configuration, 3 optimization failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qsn
