#pragma once

#include <string>
#include <vector>

namespace alrn::cli {

/// Runs the alrn command line. args[0] is the program name. Returns the
/// process exit code: 0 success, 1 I/O, configuration or usage problems,
/// 2 validation failures, 3 labeler backend failures.
int run(const std::vector<std::string>& args);

}  // namespace alrn::cli
