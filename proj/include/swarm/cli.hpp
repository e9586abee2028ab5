#pragma once

namespace swarm {

/// Default output directory for train and simulate when --out is absent.
inline constexpr const char* kOutDirEnv = "SWARM_OUT_DIR";

/// Entry point for the swarm_cli tool. Returns the process exit status and
/// prints diagnostics to stderr.
int run_cli(int argc, char** argv);

}  // namespace swarm
