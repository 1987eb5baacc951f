#pragma once

namespace pani {

// entry point behind the binary; exposed for in-process testing.
// exit codes: 0 success, 1 usage/config, 2 boundary-regime refusal,
// 3 validation failure
int run_cli(int argc, const char* const* argv);

}  // namespace pani
