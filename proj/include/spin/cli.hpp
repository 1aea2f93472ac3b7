#ifndef SPIN_CLI_HPP_
#define SPIN_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace spin {

// Reads one real per line (UTF-8, LF or CRLF, surrounding blanks ignored,
// empty lines skipped).  A non-numeric first line is treated as a header, so
// a single-column CSV works unchanged.  Throws std::runtime_error listing the
// offending line numbers on malformed content.
std::vector<double> read_draws(std::istream& in, const std::string& source_name);

// Same, from a file path; "-" reads standard input.
std::vector<double> read_draws_file(const std::string& path);

// Command-line entry point shared by the binary and the CLI tests: argv-style
// words without the program name.  Machine-readable output goes to `out`,
// logs and diagnostics to `err`.  Returns the process exit code (0 iff every
// requested output was produced).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spin

#endif
