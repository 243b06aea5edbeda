#pragma once

#include <ostream>
#include <string>

namespace zbias::cli {

enum ExitCode : int {
    kOk = 0,
    kValidation = 1,
    kIo = 2,
    kDegenerate = 3,
};

/// Run the command line `argv[0] <subcommand> ...`, writing results to `out`
/// and a single diagnostic line to `err` on failure. Returns the exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Round to 4 decimals, ties to even, and render as in a printed table.
std::string table_cell(double x);

}  // namespace zbias::cli
