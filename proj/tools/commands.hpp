#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hfa::cli {

enum ExitCode { kOk = 0, kUsage = 2, kRuntime = 3 };

/// Runs one command line (args[0] is the program name). Results go to `out`, diagnostics
/// and the JSON error line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Installs the SIGINT handler that asks a running optimization to checkpoint and stop.
void install_interrupt_handler();

}  // namespace hfa::cli
