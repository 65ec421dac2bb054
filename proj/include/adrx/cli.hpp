#pragma once

namespace adrx::hx {

// Entry point behind the `adrx` binary: subcommands run / sweep / fsweep /
// gen-taps / selftest.  Returns 0 on success, 2 on configuration or usage
// errors, 1 on runtime failures.
int cli_main(int argc, const char* const* argv);

}  // namespace adrx::hx
