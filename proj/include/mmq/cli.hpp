#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmq {

// Experiment front end.  args excludes the program name.  Returns 0 on
// success, 2 on usage/config errors, 3 on numeric failures; every error path
// prints a single "error: <category>: <detail>" line to err.  Output files
// are buffered and flushed only after the experiment succeeds, so failed runs
// leave no partial CSVs behind.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmq
