#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace inclusive::cli {

/// Parses "a..b" (inclusive range), "a,b,c" or a single seed.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

/// Runs the inclusive-irl command line. `args` excludes the program name.
/// Returns 0 on success, 1 on runtime failure, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace inclusive::cli
