#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pidsyn/commands.hpp"
#include "pidsyn/config.hpp"
#include "pidsyn/sim.hpp"

namespace {

// Default config path: --config beats PIDSYN_CONFIG beats built-in defaults.
std::string env_config() {
  const char* p = std::getenv("PIDSYN_CONFIG");
  return p ? p : "";
}

}  // namespace

int main(int argc, char** argv) {
  using pidsyn::cli::CommandOptions;

  CLI::App app{"pidsyn: robust PID tracking synthesis for an uncertain "
               "second-order positioning stage"};
  app.require_subcommand(1);

  std::string config_path = env_config();
  std::string out_dir;
  CommandOptions opt;
  std::vector<double> wrench_args;
  long long seed_arg = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (default: $PIDSYN_CONFIG)");
    cmd->add_option("--out", out_dir, "output directory (default: config output.dir)");
  };

  CLI::App* synth = app.add_subcommand("synth", "synthesize the robust PID controller");
  add_common(synth);

  CLI::App* verify = app.add_subcommand("verify", "check a certificate or a gain set");
  add_common(verify);
  verify->add_option("--certificate", opt.certificate_path, "certificate file to validate");
  verify->add_option("--gains", opt.gains_path, "gains file to check against its gamma");

  CLI::App* simulate = app.add_subcommand("simulate", "run closed-loop time simulations");
  add_common(simulate);
  simulate->add_option("--gains", opt.gains_path, "gains file (default: inline synthesis)");
  CLI::Option* seed_opt = simulate->add_option("--seed", seed_arg, "noise seed override");
  simulate->add_flag("--gnuplot", opt.gnuplot, "also write a gnuplot script");

  CLI::App* hinf = app.add_subcommand("hinf", "closed-loop H-infinity analysis");
  add_common(hinf);
  hinf->add_option("--gains", opt.gains_path, "gains file (default: inline synthesis)");

  CLI::App* sweep = app.add_subcommand("sweep", "stability/H-infinity lattice over the uncertainty box");
  add_common(sweep);
  sweep->add_option("--gains", opt.gains_path, "gains file (default: inline synthesis)");
  sweep->add_option("--grid", opt.grid_n, "lattice points per axis (default: config sweep.grid_n)");
  sweep->add_flag("--gnuplot", opt.gnuplot, "also write a gnuplot script");

  CLI::App* allocate = app.add_subcommand("allocate", "map a global wrench to the eight forcer commands");
  add_common(allocate);
  allocate->add_option("wrench", wrench_args, "Fx Fy Fz Tx Ty Tz")->expected(6);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pidsyn::cli::kExitConfig;
  }

  try {
    pidsyn::cli::Config cfg = pidsyn::cli::load_config(config_path);
    opt.out_dir = out_dir.empty() ? cfg.out_dir : out_dir;
    if (*seed_opt) {
      opt.seed_set = true;
      opt.seed = static_cast<std::uint64_t>(seed_arg);
    }
    if (synth->parsed()) return pidsyn::cli::cmd_synth(cfg, opt);
    if (verify->parsed()) return pidsyn::cli::cmd_verify(cfg, opt);
    if (simulate->parsed()) return pidsyn::cli::cmd_simulate(cfg, opt);
    if (hinf->parsed()) return pidsyn::cli::cmd_hinf(cfg, opt);
    if (sweep->parsed()) return pidsyn::cli::cmd_sweep(cfg, opt);
    if (allocate->parsed()) {
      pidsyn::Vector6d w;
      for (int i = 0; i < 6; ++i) w(i) = wrench_args[static_cast<std::size_t>(i)];
      return pidsyn::cli::cmd_allocate(cfg, w);
    }
  } catch (const pidsyn::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return pidsyn::cli::kExitConfig;
  } catch (const pidsyn::sim::DivergenceError& e) {
    std::cerr << "simulation diverged at t = " << e.time() << "\n";
    return pidsyn::cli::kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pidsyn::cli::kExitSolverFailure;
  }
  return pidsyn::cli::kExitConfig;
}
