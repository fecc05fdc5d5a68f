#pragma once

#include <iosfwd>

namespace threatfix {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,        // no threats, or a repair was found
    kExitThreats = 1,   // threats present (check, explain) or no repair exists (repair)
    kExitUsage = 2,     // bad flags, unreadable or malformed inputs
    kExitUnknown = 3,   // the solver gave up within the conflict budget
};

/// Runs `threatfix <subcommand> ...`. argv[0] is the program name. Reports
/// go to `out` (or the --out file), diagnostics to `err`, one line each.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace threatfix
