#pragma once

namespace bolza {

// Command-line entry point. Exit codes: 0 success, 2 schema or validation
// error, 3 infeasible, 4 failed certification, 5 non-convergence.
int run_cli(int argc, char** argv);

}  // namespace bolza
