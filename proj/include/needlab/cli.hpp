#pragma once
// Command-line front end. run_cli executes one subcommand and returns the
// process exit code; tools/main.cpp is a thin wrapper around it so tests can
// drive the interface through in-memory streams.

#include <iosfwd>
#include <string>
#include <vector>

namespace needlab {

// Exit codes: 0 success (eval: converged; sim/check: nothing refuted),
// 1 refutation or counterexample found, 2 usage/parse/input errors,
// 3 definitively stuck evaluation, 4 budget exhausted.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace needlab
