#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gshape {

/// Runs the command line; returns 0 on success, 2 on usage errors and 1 on
/// runtime errors (diagnostic written to `err`).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gshape
