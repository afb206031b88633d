#pragma once

namespace sclab {

// Entry point for the command-line front end. Exit codes: 0 all requested
// checks passed, 1 a check failed, 2 configuration or assumption violation.
int cli_main(int argc, const char* const* argv);

}  // namespace sclab
