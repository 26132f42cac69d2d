#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pweight::cli {

/// Runs one command line (without the program name). Returns 0 on success,
/// 2 on usage, parse, domain or contract errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "a,b,c" or "lo:hi:n" (n evenly spaced points, inclusive).
std::vector<double> parse_grid(const std::string& text);

} // namespace pweight::cli
