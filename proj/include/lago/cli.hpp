#pragma once

namespace lago {

// Entry point of the `lago` command-line tool. Returns the process exit
// code: 0 success, 2 validation error, 3 numerical failure.
int cli_main(int argc, const char* const* argv);

}  // namespace lago
