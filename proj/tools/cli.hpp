#pragma once

#include <ostream>

namespace curvkit::cli {

/// Runs one `curvkit` invocation. Returns the process exit code: 0 on success,
/// 1 on runtime failure, 2 for an unknown subcommand, CLI11's code for bad flags.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace curvkit::cli
