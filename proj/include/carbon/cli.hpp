#pragma once

namespace carbon {

/// Entry point for the command-line tool. Exit codes: 0 on success, 1 on a
/// domain failure (infeasible case, failed verification) with a
/// machine-readable `error: <kind>: <detail>` line on stderr, 2 on usage
/// errors. CARBON_CLEAR_TOL sets the default tolerance; --tol wins.
int cli_main(int argc, const char* const* argv);

}  // namespace carbon
