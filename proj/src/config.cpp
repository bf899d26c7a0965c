#include "pidsyn/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace pidsyn::cli {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
  std::ostringstream os;
  os << name << ":" << line << ": " << msg;
  throw ConfigError(os.str());
}

double parse_double(const std::string& name, int line, const std::string& key,
                    const std::string& raw) {
  const std::string v = trim(raw);
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    fail(name, line, "expected a number for '" + key + "', got '" + v + "'");
  }
  return x;
}

long long parse_int(const std::string& name, int line, const std::string& key,
                    const std::string& raw) {
  const std::string v = trim(raw);
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    fail(name, line, "expected an integer for '" + key + "', got '" + v + "'");
  }
  return x;
}

bool parse_bool(const std::string& name, int line, const std::string& key,
                const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(name, line, "expected true/false for '" + key + "', got '" + v + "'");
}

Eigen::Vector3d parse_vec3(const std::string& name, int line,
                           const std::string& key, const std::string& raw) {
  std::istringstream is(trim(raw));
  std::vector<std::string> parts;
  std::string tok;
  while (is >> tok) parts.push_back(tok);
  if (parts.size() != 3) {
    fail(name, line,
         "expected 3 whitespace-separated numbers for '" + key + "', got '" +
             trim(raw) + "'");
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) v(i) = parse_double(name, line, key, parts[i]);
  return v;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

Config::Config() {
  plant.m = 1.0 / 400.0;
  plant.d = 1.0 / 200.0;
  uncertainty = {-0.3, 0.3, -0.3, 0.3};
  weights = {1e4, 1e2, 0.0, 1.0};
  scurve.z1 = -125.0;
  scurve.z2 = -75.0;
  scurve.z3 = -15.0;
  scurve.rho0 = Eigen::Vector3d(-2e-5, 0.0, 0.0);
  scurve.offset = 2e-5;
  sim.duration = 3.0;
  sim.dt = 1e-5;
  sim.true_dm = 0.3;
  sim.true_dd = 0.3;
  sim.force_noise_amp = 0.05;
  sim.seed = 0;
  sim.controller_mode = pidsyn::sim::ControllerMode::Sampled;
  sim.sample_hz = 2500.0;
  sim.deriv_filter_pole = 100.0;
  sim.feedforward = true;
  sim.integrator0 = 0.0;
}

Config parse_config(const std::string& text, const std::string& name) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  std::set<std::string> seen;  // "section.key" duplicates are rejected

  auto apply = [&](const std::string& key, const std::string& value) {
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) {
      fail(name, lineno, "duplicate key '" + key + "' in section [" + section + "]");
    }
    auto num = [&] { return parse_double(name, lineno, full, value); };
    auto integer = [&] { return parse_int(name, lineno, full, value); };
    auto boolean = [&] { return parse_bool(name, lineno, full, value); };
    if (section == "plant") {
      if (key == "m") cfg.plant.m = num();
      else if (key == "d") cfg.plant.d = num();
      else fail(name, lineno, "unknown key '" + key + "' in section [plant]");
    } else if (section == "uncertainty") {
      if (key == "dm_lo") cfg.uncertainty.dm_lo = num();
      else if (key == "dm_hi") cfg.uncertainty.dm_hi = num();
      else if (key == "dd_lo") cfg.uncertainty.dd_lo = num();
      else if (key == "dd_hi") cfg.uncertainty.dd_hi = num();
      else fail(name, lineno, "unknown key '" + key + "' in section [uncertainty]");
    } else if (section == "weights") {
      if (key == "q1") cfg.weights.q1 = num();
      else if (key == "q2") cfg.weights.q2 = num();
      else if (key == "q3") cfg.weights.q3 = num();
      else if (key == "r") cfg.weights.r = num();
      else fail(name, lineno, "unknown key '" + key + "' in section [weights]");
    } else if (section == "scurve") {
      if (key == "z1") cfg.scurve.z1 = num();
      else if (key == "z2") cfg.scurve.z2 = num();
      else if (key == "z3") cfg.scurve.z3 = num();
      else if (key == "rho0") cfg.scurve.rho0 = parse_vec3(name, lineno, full, value);
      else if (key == "offset") cfg.scurve.offset = num();
      else fail(name, lineno, "unknown key '" + key + "' in section [scurve]");
    } else if (section == "solver") {
      if (key == "gap_tol") cfg.solver.gap_tol = num();
      else if (key == "feas_tol") cfg.solver.feas_tol = num();
      else if (key == "mu_min") cfg.solver.mu_min = num();
      else if (key == "max_outer") cfg.solver.max_outer = static_cast<int>(integer());
      else if (key == "max_newton") cfg.solver.max_newton = static_cast<int>(integer());
      else if (key == "barrier_factor") cfg.solver.barrier_factor = num();
      else if (key == "strict_margin") cfg.solver.strict_margin = num();
      else fail(name, lineno, "unknown key '" + key + "' in section [solver]");
    } else if (section == "sim") {
      if (key == "duration") cfg.sim.duration = num();
      else if (key == "dt") cfg.sim.dt = num();
      else if (key == "true_dm") cfg.sim.true_dm = num();
      else if (key == "true_dd") cfg.sim.true_dd = num();
      else if (key == "force_noise_amp") cfg.sim.force_noise_amp = num();
      else if (key == "seed") cfg.sim.seed = static_cast<std::uint64_t>(integer());
      else if (key == "controller_mode") {
        const std::string v = trim(value);
        if (v == "continuous") cfg.sim.controller_mode = pidsyn::sim::ControllerMode::Continuous;
        else if (v == "sampled") cfg.sim.controller_mode = pidsyn::sim::ControllerMode::Sampled;
        else fail(name, lineno, "expected continuous|sampled for 'sim.controller_mode', got '" + v + "'");
      } else if (key == "sample_hz") cfg.sim.sample_hz = num();
      else if (key == "deriv_filter_pole") cfg.sim.deriv_filter_pole = num();
      else if (key == "feedforward") cfg.sim.feedforward = boolean();
      else if (key == "integrator0") cfg.sim.integrator0 = num();
      else if (key == "paired") cfg.sim_paired = boolean();
      else fail(name, lineno, "unknown key '" + key + "' in section [sim]");
    } else if (section == "sweep") {
      if (key == "grid_n") cfg.sweep_grid = static_cast<int>(integer());
      else fail(name, lineno, "unknown key '" + key + "' in section [sweep]");
    } else if (section == "allocation") {
      if (key == "arm_length") cfg.arm_length = num();
      else fail(name, lineno, "unknown key '" + key + "' in section [allocation]");
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = trim(value);
      else fail(name, lineno, "unknown key '" + key + "' in section [output]");
    } else if (section == "verify") {
      if (key == "tolerance") cfg.verify_tolerance = num();
      else fail(name, lineno, "unknown key '" + key + "' in section [verify]");
    } else if (section.empty()) {
      fail(name, lineno, "key '" + key + "' appears before any [section] header");
    } else {
      fail(name, lineno, "unknown section [" + section + "]");
    }
  };

  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        fail(name, lineno, "malformed section header '" + t + "'");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      fail(name, lineno, "expected 'key = value', got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = t.substr(eq + 1);
    if (key.empty()) fail(name, lineno, "empty key before '='");
    apply(key, value);
  }

  validate_config(cfg, name);
  return cfg;
}

Config load_config(const std::string& path) {
  if (path.empty()) {
    Config cfg;
    validate_config(cfg, "<defaults>");
    return cfg;
  }
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str(), path);
}

std::string serialize_config(const Config& cfg) {
  std::ostringstream os;
  os << "[plant]\n";
  os << "m = " << fmt(cfg.plant.m) << "\n";
  os << "d = " << fmt(cfg.plant.d) << "\n";
  os << "\n[uncertainty]\n";
  os << "dm_lo = " << fmt(cfg.uncertainty.dm_lo) << "\n";
  os << "dm_hi = " << fmt(cfg.uncertainty.dm_hi) << "\n";
  os << "dd_lo = " << fmt(cfg.uncertainty.dd_lo) << "\n";
  os << "dd_hi = " << fmt(cfg.uncertainty.dd_hi) << "\n";
  os << "\n[weights]\n";
  os << "q1 = " << fmt(cfg.weights.q1) << "\n";
  os << "q2 = " << fmt(cfg.weights.q2) << "\n";
  os << "q3 = " << fmt(cfg.weights.q3) << "\n";
  os << "r = " << fmt(cfg.weights.r) << "\n";
  os << "\n[scurve]\n";
  os << "z1 = " << fmt(cfg.scurve.z1) << "\n";
  os << "z2 = " << fmt(cfg.scurve.z2) << "\n";
  os << "z3 = " << fmt(cfg.scurve.z3) << "\n";
  os << "rho0 = " << fmt(cfg.scurve.rho0(0)) << " " << fmt(cfg.scurve.rho0(1))
     << " " << fmt(cfg.scurve.rho0(2)) << "\n";
  os << "offset = " << fmt(cfg.scurve.offset) << "\n";
  os << "\n[solver]\n";
  os << "gap_tol = " << fmt(cfg.solver.gap_tol) << "\n";
  os << "feas_tol = " << fmt(cfg.solver.feas_tol) << "\n";
  os << "mu_min = " << fmt(cfg.solver.mu_min) << "\n";
  os << "max_outer = " << cfg.solver.max_outer << "\n";
  os << "max_newton = " << cfg.solver.max_newton << "\n";
  os << "barrier_factor = " << fmt(cfg.solver.barrier_factor) << "\n";
  os << "strict_margin = " << fmt(cfg.solver.strict_margin) << "\n";
  os << "\n[sim]\n";
  os << "duration = " << fmt(cfg.sim.duration) << "\n";
  os << "dt = " << fmt(cfg.sim.dt) << "\n";
  os << "true_dm = " << fmt(cfg.sim.true_dm) << "\n";
  os << "true_dd = " << fmt(cfg.sim.true_dd) << "\n";
  os << "force_noise_amp = " << fmt(cfg.sim.force_noise_amp) << "\n";
  os << "seed = " << cfg.sim.seed << "\n";
  os << "controller_mode = "
     << (cfg.sim.controller_mode == pidsyn::sim::ControllerMode::Sampled
             ? "sampled"
             : "continuous")
     << "\n";
  os << "sample_hz = " << fmt(cfg.sim.sample_hz) << "\n";
  os << "deriv_filter_pole = " << fmt(cfg.sim.deriv_filter_pole) << "\n";
  os << "feedforward = " << (cfg.sim.feedforward ? "true" : "false") << "\n";
  os << "integrator0 = " << fmt(cfg.sim.integrator0) << "\n";
  os << "paired = " << (cfg.sim_paired ? "true" : "false") << "\n";
  os << "\n[sweep]\n";
  os << "grid_n = " << cfg.sweep_grid << "\n";
  os << "\n[allocation]\n";
  os << "arm_length = " << fmt(cfg.arm_length) << "\n";
  os << "\n[output]\n";
  os << "dir = " << cfg.out_dir << "\n";
  os << "\n[verify]\n";
  os << "tolerance = " << fmt(cfg.verify_tolerance) << "\n";
  return os.str();
}

void validate_config(const Config& cfg, const std::string& name) {
  auto bad = [&](const std::string& msg) { throw ConfigError(name + ": " + msg); };
  if (!(cfg.plant.m > 0.0)) bad("plant.m must be positive");
  if (!(cfg.plant.d >= 0.0)) bad("plant.d must be nonnegative");
  if (cfg.uncertainty.dm_lo > cfg.uncertainty.dm_hi)
    bad("uncertainty.dm_lo exceeds uncertainty.dm_hi");
  if (cfg.uncertainty.dd_lo > cfg.uncertainty.dd_hi)
    bad("uncertainty.dd_lo exceeds uncertainty.dd_hi");
  if (!(1.0 + cfg.uncertainty.dm_lo > 0.0))
    bad("uncertainty.dm_lo makes the perturbed mass nonpositive");
  if (!(cfg.weights.q1 >= 0.0 && cfg.weights.q2 >= 0.0 && cfg.weights.q3 >= 0.0))
    bad("weights.q1/q2/q3 must be nonnegative");
  if (cfg.weights.r == 0.0)
    bad("weights.r must be nonzero (the control-rate channel loses rank)");
  {
    // Reference generator must be Hurwitz: necessary sign conditions plus the
    // third-order Routh product test z2*z3 < z1 < 0 (companion-form bottom row).
    const double a2 = -cfg.scurve.z3, a1 = -cfg.scurve.z2, a0 = -cfg.scurve.z1;
    if (!(a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a2 * a1 > a0))
      bad("scurve.z1/z2/z3 do not define a stable reference generator");
  }
  if (!(cfg.solver.gap_tol > 0.0)) bad("solver.gap_tol must be positive");
  if (!(cfg.solver.feas_tol > 0.0)) bad("solver.feas_tol must be positive");
  if (!(cfg.solver.mu_min > 0.0)) bad("solver.mu_min must be positive");
  if (cfg.solver.max_outer < 1) bad("solver.max_outer must be at least 1");
  if (cfg.solver.max_newton < 1) bad("solver.max_newton must be at least 1");
  if (!(cfg.solver.barrier_factor > 1.0)) bad("solver.barrier_factor must exceed 1");
  if (!(cfg.solver.strict_margin > 0.0)) bad("solver.strict_margin must be positive");
  if (!(cfg.sim.dt > 0.0)) bad("sim.dt must be positive");
  if (!(cfg.sim.duration >= cfg.sim.dt)) bad("sim.duration must be at least one step");
  if (!(cfg.sim.force_noise_amp >= 0.0)) bad("sim.force_noise_amp must be nonnegative");
  if (!(cfg.sim.sample_hz > 0.0)) bad("sim.sample_hz must be positive");
  if (!(cfg.sim.deriv_filter_pole > 0.0)) bad("sim.deriv_filter_pole must be positive");
  if (!(1.0 + cfg.sim.true_dm > 0.0)) bad("sim.true_dm makes the true mass nonpositive");
  if (cfg.sweep_grid < 2) bad("sweep.grid_n must be at least 2");
  if (!(cfg.arm_length > 0.0)) bad("allocation.arm_length must be positive");
  if (!(cfg.verify_tolerance > 0.0)) bad("verify.tolerance must be positive");
  if (cfg.out_dir.empty()) bad("output.dir must not be empty");
}

}  // namespace pidsyn::cli
