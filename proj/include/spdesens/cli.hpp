#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spdesens {

/// Version of the CSV layouts written by the command-line driver.
inline constexpr int kCsvSchemaVersion = 1;

/// Runs one subcommand. CSV goes to `out` (or to --out), messages to `err`.
/// Exit codes: 0 success or PASS, 1 FAIL or runtime error, 2 usage or
/// configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// %.17g formatting used for every number in CSV output.
std::string format_number(double x);

}  // namespace spdesens
