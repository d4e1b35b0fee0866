#pragma once

namespace pcast {

// Entry point behind tools/pcast. Exit codes: 0 success, 1 invalid
// configuration or arguments, 2 I/O failure, 3 internal error.
int run_cli(int argc, const char* const* argv);

} // namespace pcast
