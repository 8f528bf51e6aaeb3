#pragma once

namespace certmon {

/// Entry point of the certmon command line tool. Returns the process exit
/// code: 0 on success, 2 on validation errors, 1 on IO errors.
int run_cli(int argc, char** argv);

}  // namespace certmon
