#pragma once

#include <iosfwd>

namespace tain::cli {

/// Entry point for the `tain` tool; returns the process exit code. Errors are
/// reported on `err` as a single `error: <kind>: <message>` line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tain::cli
