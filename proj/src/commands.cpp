#include "pidsyn/commands.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "pidsyn/analysis.hpp"
#include "pidsyn/sdp.hpp"
#include "pidsyn/sim.hpp"

namespace pidsyn::cli {
namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt_vec(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += " ";
    s += fmt(v(i));
  }
  return s;
}

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

Eigen::VectorXd parse_numbers(const std::string& name, int line,
                              const std::string& key, const std::string& raw,
                              int n) {
  std::istringstream is(trim(raw));
  std::vector<std::string> parts;
  std::string tok;
  while (is >> tok) parts.push_back(tok);
  if (static_cast<int>(parts.size()) != n) {
    std::ostringstream os;
    os << "expected " << n << " whitespace-separated numbers for '" << key
       << "', got " << parts.size();
    fail(name, line, os.str());
  }
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = parse_double(name, line, key, parts[i]);
  return v;
}

// Minimal section/key scanner shared by the gains and certificate loaders.
// Returns "key" -> (value, line) for the single expected section.
std::map<std::string, std::pair<std::string, int>> scan_kv(
    const std::string& path, const std::string& expected_section) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open file");
  std::map<std::string, std::pair<std::string, int>> out;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        fail(path, lineno, "malformed section header '" + t + "'");
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section != expected_section) {
        fail(path, lineno, "unknown section [" + section + "], expected [" +
                               expected_section + "]");
      }
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      fail(path, lineno, "expected 'key = value', got '" + t + "'");
    }
    if (section.empty()) {
      fail(path, lineno, "key appears before the [" + expected_section + "] header");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) fail(path, lineno, "empty key before '='");
    if (!out.emplace(key, std::make_pair(t.substr(eq + 1), lineno)).second) {
      fail(path, lineno, "duplicate key '" + key + "'");
    }
  }
  return out;
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path p = fs::path(dir) / name;
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << content;
  if (!f) throw std::runtime_error("short write to " + p.string());
}

std::array<model::AugmentedSystem, 4> vertices_of(const Config& cfg) {
  return model::polytope_vertices(cfg.plant, cfg.uncertainty, cfg.scurve,
                                  cfg.weights);
}

std::vector<model::AugmentedSystem> vertices_vec(const Config& cfg) {
  const auto arr = vertices_of(cfg);
  return {arr.begin(), arr.end()};
}

lmi::GainVector gain_from_pid(const lmi::PidGains& pid) {
  lmi::GainVector g;
  g.k << 0.0, 0.0, 0.0, -pid.ki, -pid.kp, -pid.kd;
  return g;
}

const char* status_name(sdp::SolveStatus s) {
  switch (s) {
    case sdp::SolveStatus::Optimal: return "optimal";
    case sdp::SolveStatus::Infeasible: return "infeasible";
    case sdp::SolveStatus::MaxIterations: return "max_iterations";
    case sdp::SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

struct SynthOutcome {
  sdp::SdpSolution sol;
  lmi::Certificate cert;
  lmi::GainVector gain;
  lmi::PidGains pid;
};

// Runs the model -> lmi -> sdp pipeline.  Returns an exit code; the outcome
// is only complete on kExitOk.  `message` carries the failure reason.
int run_synth(const Config& cfg, SynthOutcome& out, std::string& message) {
  const auto verts = vertices_of(cfg);
  const sdp::SdpProblem prob = sdp::assemble(verts, cfg.solver.mu_min);
  out.sol = sdp::solve(prob, cfg.solver);
  if (out.sol.status == sdp::SolveStatus::Infeasible) {
    message = "synthesis SDP is infeasible at mu_min = " + fmt(cfg.solver.mu_min);
    return kExitInfeasible;
  }
  if (out.sol.status != sdp::SolveStatus::Optimal) {
    message = std::string("solver stopped with status ") + status_name(out.sol.status);
    return kExitSolverFailure;
  }
  out.cert = sdp::to_certificate(out.sol.x);
  try {
    out.gain = lmi::extract_gain(out.cert);
    out.pid = lmi::to_pid(out.gain);
  } catch (const std::exception& e) {
    message = std::string("gain recovery failed: ") + e.what();
    return kExitSolverFailure;
  }
  return kExitOk;
}

// Resolves controller gains for simulate/hinf/sweep: from --gains when given,
// otherwise by an inline synthesis run.  Prints nothing on the file path.
int obtain_gains(const Config& cfg, const CommandOptions& opt, GainsFile& gf,
                 std::string& origin, std::string& message) {
  if (!opt.gains_path.empty()) {
    gf = load_gains(opt.gains_path);
    origin = "file " + opt.gains_path;
    return kExitOk;
  }
  SynthOutcome syn;
  const int rc = run_synth(cfg, syn, message);
  if (rc != kExitOk) return rc;
  gf.pid = syn.pid;
  gf.gamma = 1.0 / std::sqrt(syn.sol.objective);
  gf.has_gamma = true;
  origin = "inline synthesis";
  return kExitOk;
}

std::string gnuplot_sim_script(const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "set datafile separator ','\n";
  os << "set xlabel 't [s]'\n";
  os << "set ylabel 'e [m]'\n";
  os << "set key outside\n";
  os << "plot ";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) os << ", \\\n     ";
    os << "'trace_" << names[i] << ".csv' using 1:4 with lines title '"
       << names[i] << "'";
  }
  os << "\n";
  return os.str();
}

std::string gnuplot_sweep_script() {
  std::ostringstream os;
  os << "set datafile separator ','\n";
  os << "set xlabel 'dm (fraction)'\n";
  os << "set ylabel 'dd (fraction)'\n";
  os << "set zlabel 'hinf'\n";
  os << "splot 'sweep.csv' using 1:2:4 with points pointtype 7 palette title 'hinf'\n";
  return os.str();
}

json certificate_json(const lmi::Certificate& cert) {
  json jc;
  jc["mu"] = cert.mu;
  jc["w3"] = cert.W3;
  jc["w2"] = std::vector<double>(cert.W2.data(), cert.W2.data() + 6);
  std::vector<std::vector<double>> w1(6, std::vector<double>(6));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) w1[i][j] = cert.W1(i, j);
  jc["w1"] = w1;
  return jc;
}

}  // namespace

GainsFile load_gains(const std::string& path) {
  const auto kv = scan_kv(path, "gains");
  GainsFile gf;
  for (const char* req : {"kp", "ki", "kd"}) {
    if (!kv.count(req)) {
      throw ConfigError(path + ": missing key '" + req + "' in [gains]");
    }
  }
  for (const auto& [key, entry] : kv) {
    const auto& [value, line] = entry;
    if (key == "kp") gf.pid.kp = parse_double(path, line, key, value);
    else if (key == "ki") gf.pid.ki = parse_double(path, line, key, value);
    else if (key == "kd") gf.pid.kd = parse_double(path, line, key, value);
    else if (key == "gamma") {
      gf.gamma = parse_double(path, line, key, value);
      gf.has_gamma = true;
      if (!(gf.gamma > 0.0)) fail(path, line, "gamma must be positive");
    } else {
      fail(path, line, "unknown key '" + key + "' in [gains]");
    }
  }
  return gf;
}

std::string serialize_gains(const lmi::PidGains& pid, double gamma) {
  std::ostringstream os;
  os << "[gains]\n";
  os << "kp = " << fmt(pid.kp) << "\n";
  os << "ki = " << fmt(pid.ki) << "\n";
  os << "kd = " << fmt(pid.kd) << "\n";
  if (std::isfinite(gamma)) os << "gamma = " << fmt(gamma) << "\n";
  return os.str();
}

lmi::Certificate load_certificate(const std::string& path) {
  const auto kv = scan_kv(path, "certificate");
  lmi::Certificate cert;
  auto need = [&](const std::string& key) -> const std::pair<std::string, int>& {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw ConfigError(path + ": missing key '" + key + "' in [certificate]");
    }
    return it->second;
  };
  {
    const auto& [v, line] = need("mu");
    cert.mu = parse_double(path, line, "mu", v);
  }
  {
    const auto& [v, line] = need("w3");
    cert.W3 = parse_double(path, line, "w3", v);
  }
  {
    const auto& [v, line] = need("w2");
    cert.W2 = parse_numbers(path, line, "w2", v, 6);
  }
  Eigen::Matrix<double, 6, 6> w1;
  for (int i = 0; i < 6; ++i) {
    const std::string key = "w1_row" + std::to_string(i);
    const auto& [v, line] = need(key);
    w1.row(i) = parse_numbers(path, line, key, v, 6).transpose();
  }
  // Hand-typed matrices may carry asymmetric rounding; the certificate is
  // symmetric by definition.
  cert.W1 = 0.5 * (w1 + w1.transpose());
  for (const auto& [key, entry] : kv) {
    if (key == "mu" || key == "w3" || key == "w2") continue;
    if (key.rfind("w1_row", 0) == 0 && key.size() == 7 &&
        key[6] >= '0' && key[6] <= '5') continue;
    fail(path, entry.second, "unknown key '" + key + "' in [certificate]");
  }
  return cert;
}

std::string serialize_certificate(const lmi::Certificate& cert) {
  std::ostringstream os;
  os << "[certificate]\n";
  os << "mu = " << fmt(cert.mu) << "\n";
  os << "w3 = " << fmt(cert.W3) << "\n";
  os << "w2 = " << fmt_vec(cert.W2) << "\n";
  for (int i = 0; i < 6; ++i) {
    os << "w1_row" << i << " = " << fmt_vec(cert.W1.row(i).transpose()) << "\n";
  }
  return os.str();
}

int cmd_synth(const Config& cfg, const CommandOptions& opt) {
  SynthOutcome syn;
  std::string message;
  const int rc = run_synth(cfg, syn, message);

  std::ostringstream rep;
  json j;
  rep << "[synthesis]\n";
  rep << "status = " << status_name(syn.sol.status) << "\n";
  rep << "mu = " << fmt(syn.sol.objective) << "\n";
  rep << "gamma = " << fmt(1.0 / std::sqrt(syn.sol.objective)) << "\n";
  rep << "dual_bound = " << fmt(syn.sol.dual_bound) << "\n";
  rep << "gap = " << fmt(syn.sol.gap) << "\n";
  rep << "newton_iterations = " << syn.sol.iterations << "\n";
  j["synthesis"] = {{"status", status_name(syn.sol.status)},
                    {"mu", syn.sol.objective},
                    {"gamma", 1.0 / std::sqrt(syn.sol.objective)},
                    {"dual_bound", syn.sol.dual_bound},
                    {"gap", syn.sol.gap},
                    {"newton_iterations", syn.sol.iterations}};
  if (rc != kExitOk) {
    rep << "error = " << message << "\n";
    j["synthesis"]["error"] = message;
    const std::string text = rep.str();
    write_file(opt.out_dir, "synth_report.txt", text);
    write_file(opt.out_dir, "synth_report.json", j.dump(2) + "\n");
    std::cout << text;
    return rc;
  }

  rep << "\n[gains]\n";
  rep << "ki = " << fmt(syn.pid.ki) << "\n";
  rep << "kp = " << fmt(syn.pid.kp) << "\n";
  rep << "kd = " << fmt(syn.pid.kd) << "\n";
  rep << "k = " << fmt_vec(syn.gain.k.transpose()) << "\n";
  j["gains"] = {{"ki", syn.pid.ki},
                {"kp", syn.pid.kp},
                {"kd", syn.pid.kd},
                {"k", std::vector<double>(syn.gain.k.data(), syn.gain.k.data() + 6)}};

  // Solver-grade validation of the certificate the solve just produced.
  const auto verts = vertices_vec(cfg);
  const auto report =
      analysis::validate_certificate(syn.cert, verts, 10.0 * cfg.solver.feas_tol);
  rep << "\n[certificate]\n";
  rep << "feasible = " << (report.feasible ? "true" : "false") << "\n";
  rep << "w_min_eig = " << fmt(report.w_min_eig) << "\n";
  rep << "sparsity_max = " << fmt(report.sparsity_max) << "\n";
  rep << "mu = " << fmt(syn.cert.mu) << "\n";
  rep << "w3 = " << fmt(syn.cert.W3) << "\n";
  j["certificate"] = certificate_json(syn.cert);
  j["certificate"]["feasible"] = report.feasible;
  j["certificate"]["w_min_eig"] = report.w_min_eig;
  j["certificate"]["sparsity_max"] = report.sparsity_max;

  json jverts = json::array();
  for (std::size_t v = 0; v < report.theta_max.size(); ++v) {
    rep << "\n[vertex_" << v << "]\n";
    rep << "theta_max = " << fmt(report.theta_max[v]) << "\n";
    rep << "schur_min = " << fmt(report.schur_min[v]) << "\n";
    rep << "abscissa = " << fmt(report.abscissa[v]) << "\n";
    rep << "hinf = " << fmt(report.hinf[v]) << "\n";
    jverts.push_back({{"theta_max", report.theta_max[v]},
                      {"schur_min", report.schur_min[v]},
                      {"abscissa", report.abscissa[v]},
                      {"hinf", report.hinf[v]}});
  }
  j["vertices"] = jverts;

  const std::string text = rep.str();
  write_file(opt.out_dir, "synth_report.txt", text);
  write_file(opt.out_dir, "synth_report.json", j.dump(2) + "\n");
  write_file(opt.out_dir, "certificate.txt", serialize_certificate(syn.cert));
  write_file(opt.out_dir, "gains.txt",
             serialize_gains(syn.pid, 1.0 / std::sqrt(syn.sol.objective)));
  std::cout << text;
  return kExitOk;
}

int cmd_verify(const Config& cfg, const CommandOptions& opt) {
  const bool has_cert = !opt.certificate_path.empty();
  const bool has_gains = !opt.gains_path.empty();
  if (has_cert == has_gains) {
    throw ConfigError("verify requires exactly one of --certificate or --gains");
  }

  std::ostringstream rep;
  json j;
  bool pass = true;

  if (has_cert) {
    const lmi::Certificate cert = load_certificate(opt.certificate_path);
    const auto report = analysis::validate_certificate(cert, vertices_vec(cfg),
                                                       cfg.verify_tolerance);
    pass = report.feasible;
    rep << "[verify]\n";
    rep << "mode = certificate\n";
    rep << "input = " << opt.certificate_path << "\n";
    rep << "tolerance = " << fmt(cfg.verify_tolerance) << "\n";
    rep << "psd_ok = " << (report.psd_ok ? "true" : "false") << "\n";
    rep << "sparsity_ok = " << (report.sparsity_ok ? "true" : "false") << "\n";
    rep << "theta_ok = " << (report.theta_ok ? "true" : "false") << "\n";
    rep << "gain_ok = " << (report.gain_ok ? "true" : "false") << "\n";
    rep << "feasible = " << (report.feasible ? "true" : "false") << "\n";
    rep << "w_min_eig = " << fmt(report.w_min_eig) << "\n";
    rep << "sparsity_max = " << fmt(report.sparsity_max) << "\n";
    rep << "gamma = " << fmt(report.gamma) << "\n";
    if (report.gain_ok) {
      const auto pid = lmi::to_pid(report.gain);
      rep << "ki = " << fmt(pid.ki) << "\n";
      rep << "kp = " << fmt(pid.kp) << "\n";
      rep << "kd = " << fmt(pid.kd) << "\n";
      j["gains"] = {{"ki", pid.ki}, {"kp", pid.kp}, {"kd", pid.kd}};
    }
    j["verify"] = {{"mode", "certificate"},
                   {"input", opt.certificate_path},
                   {"tolerance", cfg.verify_tolerance},
                   {"psd_ok", report.psd_ok},
                   {"sparsity_ok", report.sparsity_ok},
                   {"theta_ok", report.theta_ok},
                   {"gain_ok", report.gain_ok},
                   {"feasible", report.feasible},
                   {"gamma", report.gamma}};
    json jverts = json::array();
    for (std::size_t v = 0; v < report.theta_max.size(); ++v) {
      rep << "\n[vertex_" << v << "]\n";
      rep << "theta_max = " << fmt(report.theta_max[v]) << "\n";
      rep << "theta_scale = " << fmt(report.theta_scale[v]) << "\n";
      rep << "schur_min = " << fmt(report.schur_min[v]) << "\n";
      rep << "abscissa = " << fmt(report.abscissa[v]) << "\n";
      rep << "hinf = " << fmt(report.hinf[v]) << "\n";
      jverts.push_back({{"theta_max", report.theta_max[v]},
                        {"theta_scale", report.theta_scale[v]},
                        {"schur_min", report.schur_min[v]},
                        {"abscissa", report.abscissa[v]},
                        {"hinf", report.hinf[v]}});
    }
    j["vertices"] = jverts;
  } else {
    const GainsFile gf = load_gains(opt.gains_path);
    if (!gf.has_gamma) {
      throw ConfigError(opt.gains_path +
                        ": gain-only verification needs a 'gamma' entry to check against");
    }
    const lmi::GainVector gain = gain_from_pid(gf.pid);
    rep << "[verify]\n";
    rep << "mode = gains\n";
    rep << "input = " << opt.gains_path << "\n";
    rep << "gamma = " << fmt(gf.gamma) << "\n";
    rep << "ki = " << fmt(gf.pid.ki) << "\n";
    rep << "kp = " << fmt(gf.pid.kp) << "\n";
    rep << "kd = " << fmt(gf.pid.kd) << "\n";
    j["verify"] = {{"mode", "gains"},
                   {"input", opt.gains_path},
                   {"gamma", gf.gamma},
                   {"ki", gf.pid.ki},
                   {"kp", gf.pid.kp},
                   {"kd", gf.pid.kd}};
    json jverts = json::array();
    const auto verts = vertices_vec(cfg);
    for (std::size_t v = 0; v < verts.size(); ++v) {
      const auto cl = analysis::closed_loop(verts[v], gain);
      const double absc = analysis::spectral_abscissa(cl);
      const bool stable = absc < 0.0;
      double hinf = std::numeric_limits<double>::quiet_NaN();
      std::string note;
      if (stable) {
        try {
          hinf = analysis::hinf_norm(cl);
        } catch (const std::exception& e) {
          note = e.what();
        }
      } else {
        note = "not Hurwitz";
      }
      const bool vertex_ok = stable && std::isfinite(hinf) && hinf <= gf.gamma;
      pass = pass && vertex_ok;
      rep << "\n[vertex_" << v << "]\n";
      rep << "abscissa = " << fmt(absc) << "\n";
      rep << "stable = " << (stable ? "true" : "false") << "\n";
      rep << "hinf = " << fmt(hinf) << "\n";
      rep << "ok = " << (vertex_ok ? "true" : "false") << "\n";
      if (!note.empty()) rep << "note = " << note << "\n";
      json jv = {{"abscissa", absc},
                 {"stable", stable},
                 {"hinf", hinf},
                 {"ok", vertex_ok}};
      if (!note.empty()) jv["note"] = note;
      jverts.push_back(jv);
    }
    j["vertices"] = jverts;
  }

  rep << "\n[result]\n";
  rep << "pass = " << (pass ? "true" : "false") << "\n";
  j["result"] = {{"pass", pass}};
  const std::string text = rep.str();
  write_file(opt.out_dir, "verify_report.txt", text);
  write_file(opt.out_dir, "verify_report.json", j.dump(2) + "\n");
  std::cout << text;
  return pass ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const Config& cfg, const CommandOptions& opt) {
  GainsFile gf;
  std::string origin;
  std::string message;
  const int rc = obtain_gains(cfg, opt, gf, origin, message);
  if (rc != kExitOk) {
    std::cout << "simulate: cannot obtain gains: " << message << "\n";
    return rc;
  }

  sim::SimConfig base = cfg.sim;
  if (opt.seed_set) base.seed = opt.seed;

  struct Scenario {
    std::string name;
    sim::SimConfig cfg;
  };
  std::vector<Scenario> scenarios;
  if (cfg.sim_paired) {
    sim::SimConfig s = base;
    s.true_dm = 0.0;
    s.true_dd = 0.0;
    s.force_noise_amp = 0.0;
    scenarios.push_back({"nominal", s});
    s = base;
    s.force_noise_amp = 0.0;
    scenarios.push_back({"perturbed", s});
    s = base;
    s.true_dm = 0.0;
    s.true_dd = 0.0;
    scenarios.push_back({"noisy", s});
    scenarios.push_back({"perturbed_noisy", base});
  } else {
    scenarios.push_back({"run", base});
  }

  std::ostringstream rep;
  json j;
  rep << "[simulate]\n";
  rep << "gains = " << origin << "\n";
  rep << "ki = " << fmt(gf.pid.ki) << "\n";
  rep << "kp = " << fmt(gf.pid.kp) << "\n";
  rep << "kd = " << fmt(gf.pid.kd) << "\n";
  rep << "mode = "
      << (base.controller_mode == sim::ControllerMode::Sampled ? "sampled"
                                                               : "continuous")
      << "\n";
  rep << "duration = " << fmt(base.duration) << "\n";
  rep << "dt = " << fmt(base.dt) << "\n";
  rep << "seed = " << base.seed << "\n";
  j["simulate"] = {{"gains", origin},
                   {"ki", gf.pid.ki},
                   {"kp", gf.pid.kp},
                   {"kd", gf.pid.kd},
                   {"mode", base.controller_mode == sim::ControllerMode::Sampled
                                ? "sampled"
                                : "continuous"},
                   {"duration", base.duration},
                   {"dt", base.dt},
                   {"seed", base.seed}};

  struct Row {
    std::string name;
    sim::RmsSummary rms;
    double max_abs_e = 0.0;
    double final_abs_e = 0.0;
  };
  std::vector<Row> rows;
  std::vector<std::string> written;
  for (const auto& sc : scenarios) {
    sim::Trace tr;
    try {
      tr = sim::simulate(cfg.plant, sc.cfg, cfg.scurve, gf.pid);
    } catch (const sim::DivergenceError& e) {
      rep << "\n[scenario_" << sc.name << "]\n";
      rep << "diverged_at = " << fmt(e.time()) << "\n";
      const std::string text = rep.str();
      std::cout << text;
      std::cout << "simulate: scenario '" << sc.name << "' diverged at t = "
                << fmt(e.time()) << "\n";
      return kExitDivergence;
    }
    std::ostringstream csv;
    sim::write_csv(tr, csv);
    write_file(opt.out_dir, "trace_" + sc.name + ".csv", csv.str());
    written.push_back(sc.name);

    Row row;
    row.name = sc.name;
    row.rms = sim::summarize(tr);
    for (double e : tr.e) row.max_abs_e = std::max(row.max_abs_e, std::abs(e));
    row.final_abs_e = std::abs(tr.e.back());
    rows.push_back(row);

    rep << "\n[scenario_" << sc.name << "]\n";
    rep << "true_dm = " << fmt(sc.cfg.true_dm) << "\n";
    rep << "true_dd = " << fmt(sc.cfg.true_dd) << "\n";
    rep << "force_noise_amp = " << fmt(sc.cfg.force_noise_amp) << "\n";
    rep << "rms_e = " << fmt(row.rms.rms_e) << "\n";
    rep << "rms_edot = " << fmt(row.rms.rms_edot) << "\n";
    rep << "rms_udotfb = " << fmt(row.rms.rms_udotfb) << "\n";
    rep << "max_abs_e = " << fmt(row.max_abs_e) << "\n";
    rep << "final_abs_e = " << fmt(row.final_abs_e) << "\n";
    j["scenarios"][sc.name] = {{"true_dm", sc.cfg.true_dm},
                               {"true_dd", sc.cfg.true_dd},
                               {"force_noise_amp", sc.cfg.force_noise_amp},
                               {"rms_e", row.rms.rms_e},
                               {"rms_edot", row.rms.rms_edot},
                               {"rms_udotfb", row.rms.rms_udotfb},
                               {"max_abs_e", row.max_abs_e},
                               {"final_abs_e", row.final_abs_e}};
  }

  // Comparison table (comment lines keep the file parseable as key-value).
  rep << "\n[comparison]\n";
  rep << "# scenario            rms_e         rms_edot      rms_udotfb\n";
  for (const auto& row : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "# %-18s  %-12.6g  %-12.6g  %-12.6g\n",
                  row.name.c_str(), row.rms.rms_e, row.rms.rms_edot,
                  row.rms.rms_udotfb);
    rep << line;
  }

  if (opt.gnuplot) {
    write_file(opt.out_dir, "plot_sim.gp", gnuplot_sim_script(written));
  }
  const std::string text = rep.str();
  write_file(opt.out_dir, "sim_report.txt", text);
  write_file(opt.out_dir, "sim_report.json", j.dump(2) + "\n");
  std::cout << text;
  return kExitOk;
}

int cmd_hinf(const Config& cfg, const CommandOptions& opt) {
  GainsFile gf;
  std::string origin;
  std::string message;
  const int rc = obtain_gains(cfg, opt, gf, origin, message);
  if (rc != kExitOk) {
    std::cout << "hinf: cannot obtain gains: " << message << "\n";
    return rc;
  }
  const lmi::GainVector gain = gain_from_pid(gf.pid);

  std::ostringstream rep;
  json j;
  rep << "[hinf]\n";
  rep << "gains = " << origin << "\n";
  rep << "ki = " << fmt(gf.pid.ki) << "\n";
  rep << "kp = " << fmt(gf.pid.kp) << "\n";
  rep << "kd = " << fmt(gf.pid.kd) << "\n";
  if (gf.has_gamma) rep << "gamma = " << fmt(gf.gamma) << "\n";
  j["hinf"] = {{"gains", origin},
               {"ki", gf.pid.ki},
               {"kp", gf.pid.kp},
               {"kd", gf.pid.kd}};
  if (gf.has_gamma) j["hinf"]["gamma"] = gf.gamma;

  struct Point {
    std::string name;
    model::AugmentedSystem sys;
  };
  std::vector<Point> points;
  points.push_back(
      {"nominal", model::build_augmented(cfg.plant, 0.0, 0.0, cfg.scurve,
                                         cfg.weights)});
  const auto verts = vertices_of(cfg);
  for (std::size_t v = 0; v < verts.size(); ++v) {
    points.push_back({"vertex_" + std::to_string(v), verts[v]});
  }

  bool any_unstable = false;
  bool any_failure = false;
  for (const auto& pt : points) {
    const auto cl = analysis::closed_loop(pt.sys, gain);
    const double absc = analysis::spectral_abscissa(cl);
    rep << "\n[" << pt.name << "]\n";
    rep << "abscissa = " << fmt(absc) << "\n";
    json jp = {{"abscissa", absc}};
    if (absc >= 0.0) {
      any_unstable = true;
      rep << "stable = false\n";
      jp["stable"] = false;
    } else {
      rep << "stable = true\n";
      jp["stable"] = true;
      try {
        const auto d = analysis::hinf_detail(cl);
        rep << "grid = " << fmt(d.grid) << "\n";
        rep << "hamiltonian = " << fmt(d.hamiltonian) << "\n";
        rep << "value = " << fmt(d.value) << "\n";
        jp["grid"] = d.grid;
        jp["hamiltonian"] = d.hamiltonian;
        jp["value"] = d.value;
        if (gf.has_gamma) {
          rep << "margin = " << fmt(gf.gamma - d.value) << "\n";
          jp["margin"] = gf.gamma - d.value;
        }
      } catch (const std::exception& e) {
        any_failure = true;
        rep << "error = " << e.what() << "\n";
        jp["error"] = e.what();
      }
    }
    j["points"][pt.name] = jp;
  }

  const std::string text = rep.str();
  write_file(opt.out_dir, "hinf_report.txt", text);
  write_file(opt.out_dir, "hinf_report.json", j.dump(2) + "\n");
  std::cout << text;
  if (any_failure) return kExitSolverFailure;
  return any_unstable ? kExitInfeasible : kExitOk;
}

int cmd_sweep(const Config& cfg, const CommandOptions& opt) {
  const int grid_n = opt.grid_n > 0 ? opt.grid_n : cfg.sweep_grid;
  if (grid_n < 2) {
    throw ConfigError("sweep needs a lattice of at least 2 x 2 points (--grid)");
  }
  GainsFile gf;
  std::string origin;
  std::string message;
  const int rc = obtain_gains(cfg, opt, gf, origin, message);
  if (rc != kExitOk) {
    std::cout << "sweep: cannot obtain gains: " << message << "\n";
    return rc;
  }
  const lmi::GainVector gain = gain_from_pid(gf.pid);
  const auto points = analysis::uncertainty_sweep(
      cfg.plant, cfg.uncertainty, cfg.scurve, cfg.weights, gain, grid_n);

  std::ostringstream csv;
  csv << "dm,dd,stable,hinf\n";
  int unstable = 0;
  double hinf_min = std::numeric_limits<double>::infinity();
  double hinf_max = 0.0;
  for (const auto& p : points) {
    const bool stable = p.abscissa < 0.0;
    if (!stable) ++unstable;
    if (stable && std::isfinite(p.hinf)) {
      hinf_min = std::min(hinf_min, p.hinf);
      hinf_max = std::max(hinf_max, p.hinf);
    }
    csv << fmt(p.dm_frac) << "," << fmt(p.dd_frac) << "," << (stable ? 1 : 0)
        << "," << fmt(p.hinf) << "\n";
  }
  write_file(opt.out_dir, "sweep.csv", csv.str());

  std::ostringstream rep;
  rep << "[sweep]\n";
  rep << "gains = " << origin << "\n";
  rep << "grid_n = " << grid_n << "\n";
  rep << "points = " << points.size() << "\n";
  rep << "unstable_points = " << unstable << "\n";
  if (std::isfinite(hinf_min)) {
    rep << "hinf_min = " << fmt(hinf_min) << "\n";
    rep << "hinf_max = " << fmt(hinf_max) << "\n";
  }
  json j;
  j["sweep"] = {{"gains", origin},
                {"grid_n", grid_n},
                {"points", points.size()},
                {"unstable_points", unstable}};
  if (std::isfinite(hinf_min)) {
    j["sweep"]["hinf_min"] = hinf_min;
    j["sweep"]["hinf_max"] = hinf_max;
  }
  if (opt.gnuplot) {
    write_file(opt.out_dir, "plot_sweep.gp", gnuplot_sweep_script());
  }
  const std::string text = rep.str();
  write_file(opt.out_dir, "sweep_report.txt", text);
  write_file(opt.out_dir, "sweep_report.json", j.dump(2) + "\n");
  std::cout << text;
  return kExitOk;
}

int cmd_allocate(const Config& cfg, const Vector6d& wrench) {
  const model::WrenchAllocator alloc(cfg.arm_length);
  const Vector8d forces = alloc.allocate(wrench);
  const double residual = (alloc.compose(forces) - wrench).norm();
  std::ostringstream rep;
  rep << "[allocate]\n";
  rep << "arm_length = " << fmt(cfg.arm_length) << "\n";
  rep << "wrench = " << fmt_vec(wrench) << "\n";
  rep << "# local force order: F1x F1z F2y F2z F3x F3z F4y F4z\n";
  rep << "forces = " << fmt_vec(forces) << "\n";
  rep << "residual = " << fmt(residual) << "\n";
  std::cout << rep.str();
  return kExitOk;
}

}  // namespace pidsyn::cli
