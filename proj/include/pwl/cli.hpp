#pragma once

#include <string>
#include <vector>

namespace pwl {

// Entry point behind the pwlid executable, callable in-process for tests.
// args excludes the program name.  Returns the process exit code: 0 success,
// 2 configuration or input error, 3 simulation divergence, 4 identification
// finished without converging, 5 no feasible mode partition, 6 rank-
// deficient Hankel shift.  Errors are reported as single-line JSON on
// stderr.
int run_cli(const std::vector<std::string>& args);

}  // namespace pwl
