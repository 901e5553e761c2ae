#pragma once

namespace homoflow {

// Exit codes: 0 success (blow-up is a result, not an error), 2 config/flag
// error, 3 internal numerical failure, 4 I/O error.
int run_cli(int argc, const char* const* argv);

}  // namespace homoflow
