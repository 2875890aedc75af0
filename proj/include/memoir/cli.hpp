#pragma once

#include <iosfwd>

namespace memoir {

/// Entry point of the `memoir` command. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace memoir
