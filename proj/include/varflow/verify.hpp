#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace varflow {

/// Runs the registered invariant checks on small fixed meshes, printing one
/// `[ ok ]` / `[FAIL]` line per check to `out`.  A non-empty `filter` keeps
/// only the checks whose name contains it as a substring.  Exceptions thrown
/// by a check are caught and reported as failures.  Returns the number of
/// failing checks (0 = everything passed).
int run_verify(const std::string& filter, std::ostream& out);

/// Names of all registered checks, in execution order.
std::vector<std::string> verify_check_names();

}  // namespace varflow
