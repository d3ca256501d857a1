#pragma once

#include <iostream>
#include <span>
#include <string>

namespace hotspot {

/// Entry point behind the `hotspot` executable. `args` excludes the program
/// name. Returns the process exit code; diagnostics go to `err`.
int cli_dispatch(std::span<const std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace hotspot
