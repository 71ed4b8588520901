#pragma once

#include <iosfwd>
#include <string>

namespace norbit {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by the CLI: 0 ok, 2 config/schema error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitNumerical = 3;

/// Executes a scenario config (JSON). Artifacts land in the config's
/// output_dir, prefixed by $NEARBY_ORBIT_OUT_ROOT when set. Every artifact is
/// hashed into manifest.json.
int run_scenario(const std::string& config_path, std::ostream& log);

/// Convention audits, closed-form spot checks and quadrature smoke tests;
/// writes a timestamp-free, byte-stable selftest.json.
int run_selftest(const std::string& out_dir, std::ostream& log);

/// Sweep entry point: requires (or injects) mode == "hbar_sweep".
int run_sweep(const std::string& config_path, std::ostream& log);

}  // namespace norbit
