#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace memsched {

/// Exit statuses: 0 success, 1 semantic or constraint failure, 2 I/O, syntax
/// or usage failure.
enum ExitStatus : int { kExitOk = 0, kExitSemantic = 1, kExitEnvironment = 2 };

/// Entry point behind the `memsched` executable. `args` excludes argv[0].
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

} // namespace memsched
