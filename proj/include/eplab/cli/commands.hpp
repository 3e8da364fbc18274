#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eplab::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitNumeric = 3,
    kExitNoEp = 4,
    kExitOracleMismatch = 5,
};

// `args` excludes the program name. Tabular output goes to `out` unless
// --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace eplab::cli
