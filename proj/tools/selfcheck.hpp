#pragma once

namespace fsi_cli {

// Compact invariant sweep across all modules; prints one line per suite.
// Returns true when every suite passes.
bool run_selfcheck(int threads);

}  // namespace fsi_cli
