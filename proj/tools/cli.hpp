#pragma once

#include <iosfwd>

namespace lowlight {

/// Runs one subcommand (enhance | decompose | eval | fit-color). Returns 0 on
/// success, 1 on a runtime or I/O failure and 2 on a usage error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lowlight
