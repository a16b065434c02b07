#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mptbf::cli {

/// Entry point of the `mptbf` command line tool. Subcommands: validate,
/// prior-sample, posterior, compare, simulate. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mptbf::cli
