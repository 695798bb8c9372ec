#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace egvi {

// Runs the `egvi` command line; `args` excludes the program name. Machine and
// table output go to `out`, diagnostics to `err`. Returns the exit code.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace egvi
