#pragma once

#include <cstdint>
#include <string>

#include "pidsyn/config.hpp"
#include "pidsyn/lmi.hpp"

namespace pidsyn::cli {

// Stable exit-code contract shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitSolverFailure = 3;
inline constexpr int kExitDivergence = 4;

// Per-invocation options resolved by the front end.
struct CommandOptions {
  std::string out_dir = ".";      // where reports / CSVs / scripts land
  std::string gains_path;         // controller gains file, empty = inline synth
  std::string certificate_path;   // certificate file for verify
  int grid_n = 0;                 // sweep lattice override, 0 = config value
  bool seed_set = false;          // --seed given
  std::uint64_t seed = 0;
  bool gnuplot = false;           // also emit a gnuplot script
};

// Controller gains file content: PID parameters plus the performance level
// they were certified at (gamma may be NaN when absent).
struct GainsFile {
  lmi::PidGains pid;
  double gamma = 0.0;
  bool has_gamma = false;
};

// Gains and certificate files use the same key-value format as the config.
// Loaders throw ConfigError on malformed input.
[[nodiscard]] GainsFile load_gains(const std::string& path);
[[nodiscard]] std::string serialize_gains(const lmi::PidGains& pid,
                                          double gamma);
[[nodiscard]] lmi::Certificate load_certificate(const std::string& path);
[[nodiscard]] std::string serialize_certificate(const lmi::Certificate& cert);

// Commands.  Each returns one of the kExit* codes, prints its human-readable
// report to stdout, and writes report files under opt.out_dir.
int cmd_synth(const Config& cfg, const CommandOptions& opt);
int cmd_verify(const Config& cfg, const CommandOptions& opt);
int cmd_simulate(const Config& cfg, const CommandOptions& opt);
int cmd_hinf(const Config& cfg, const CommandOptions& opt);
int cmd_sweep(const Config& cfg, const CommandOptions& opt);
int cmd_allocate(const Config& cfg, const Vector6d& wrench);

}  // namespace pidsyn::cli
