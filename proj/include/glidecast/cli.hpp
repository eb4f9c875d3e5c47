// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace glidecast {

enum ExitStatus : int {
    kExitSuccess = 0,
    kExitRuntimeFailure = 1,  ///< I/O or numeric failure
    kExitUsage = 2,           ///< bad command line or config
};

/// Runs one command: `args` excludes the program name, e.g.
/// {"simulate", "--config", "run.json", "--out", "traj.csv"}.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace glidecast
