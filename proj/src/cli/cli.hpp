#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace verifai::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

/// Runs one command line (args excludes the program name). Structured
/// records go to `out`, human-readable text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace verifai::cli
