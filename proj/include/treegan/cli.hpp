#pragma once

namespace treegan {

// Batch command-line interface. Returns 0 on success, 1 on usage errors,
// 2 on data or validation errors.
int run_cli(int argc, const char* const* argv);

}  // namespace treegan
