#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace an2vec::cli {

/// Runs one command line. Returns 0 on success, 2 for usage errors and 1
/// for runtime failures. Messages go to `err`, reports to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace an2vec::cli
