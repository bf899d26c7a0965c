#pragma once

#include <stdexcept>
#include <string>

#include "pidsyn/model.hpp"
#include "pidsyn/sdp.hpp"
#include "pidsyn/sim.hpp"

namespace pidsyn::cli {

// Parse or validation failure; the message carries "name:line:" context
// where a specific line is at fault.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Full toolkit configuration.  The defaults describe the reference design
// case end to end, so an empty config is immediately usable.
struct Config {
  model::SecondOrderPlant plant;
  model::UncertaintyBox uncertainty;
  model::WeightSpec weights;
  model::SCurveSpec scurve;
  sdp::SolverOptions solver;
  sim::SimConfig sim;
  int sweep_grid = 11;
  double arm_length = 0.1;  // forcer moment arm, m
  std::string out_dir = ".";
  double verify_tolerance = 1e-2;  // certificate slack regime for cmd_verify
  bool sim_paired = true;          // simulate runs the four-scenario study

  Config();
};

// Plain-text key-value format with [section] headers, one "key = value" per
// line, full-line comments starting with '#' or ';'.  Unknown sections or
// keys, malformed values, duplicate keys, and invariant violations all throw
// ConfigError with the offending location.
[[nodiscard]] Config parse_config(const std::string& text,
                                  const std::string& name);

// Reads and parses a config file; empty path yields the defaults.
[[nodiscard]] Config load_config(const std::string& path);

// Emits every field in a fixed order with full precision; the result parses
// back to an identical Config.
[[nodiscard]] std::string serialize_config(const Config& cfg);

// Cross-field invariants (positive mass at every vertex, Hurwitz reference
// generator, nonzero control-rate weight, step sizes, ...).  Called by
// parse_config/load_config; exposed for programmatically built configs.
void validate_config(const Config& cfg, const std::string& name);

}  // namespace pidsyn::cli
