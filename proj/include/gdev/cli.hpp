#pragma once

#include <iosfwd>

namespace gdev {

// Entry point of the `gdev` tool. Exit status: 0 success, 1 on any module
// error (diagnostic on `err`), 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gdev
