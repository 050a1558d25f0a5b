// cli.hpp - command-line front end

#pragma once

#include <string>
#include <vector>

namespace kerrcav::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kIoError = 3,
    kBlowUp = 4,
    kMissingBranch = 5,
};

/// Runs one subcommand; args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace kerrcav::cli
