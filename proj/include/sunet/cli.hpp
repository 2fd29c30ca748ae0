#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sunet {

enum ExitCode { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Runs one command line (args[0] is the program name). Results go to files
/// under --out; summaries to `out`, diagnostics and usage to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sunet
