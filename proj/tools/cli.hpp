// The `star` command line as a library so tests can drive it in-process.

#ifndef STAR_TOOLS_CLI_HPP
#define STAR_TOOLS_CLI_HPP

#include <iosfwd>

namespace star::cli {

enum ExitCode : int {
  ok = 0,
  usage = 1,       // bad arguments, including an out-of-range horizon
  io = 2,          // missing input file, port already in use
  invalid = 3,     // parse or graph validation errors
  reasoning = 4,   // grounding or consistency failure
  annotator = 5,   // annotation service unavailable or malformed
};

/// Runs `star <subcommand> ...`. `in` backs the `-` input path.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace star::cli

#endif  // STAR_TOOLS_CLI_HPP
