#pragma once

namespace entangle {

// Full command-line driver (subcommands edist, activate, witness,
// teleport-sim, lemma-check).  Returns the process exit code: 0 on success,
// 1 on invalid input or runtime failure, 2 when an activation scan finishes
// without finding an instance.
int run_cli(int argc, char** argv);

}  // namespace entangle
