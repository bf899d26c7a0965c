#include "pidsyn/sim.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "pidsyn/linalg.hpp"

namespace pidsyn::sim {

namespace {

constexpr double kDivergeBound = 1e6;  // m

struct RefSample {
  double r = 0.0;
  double rdot = 0.0;
  double rddot = 0.0;
};

RefSample ref_from_state(const Eigen::Vector3d& rho, double offset) {
  return {rho(0) + offset, rho(1), rho(2)};
}

// Uniform draw in [-amp, amp] with a platform-independent u64 -> double map.
double draw_noise(std::mt19937_64& gen, double amp) {
  const double u01 = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return amp * (2.0 * u01 - 1.0);
}

void check_config(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) {
    throw std::invalid_argument("sim: dt must be positive");
  }
  if (!(cfg.duration >= cfg.dt)) {
    throw std::invalid_argument("sim: duration must be at least dt");
  }
  if (!(cfg.sample_hz > 0.0)) {
    throw std::invalid_argument("sim: sample_hz must be positive");
  }
  if (!(cfg.deriv_filter_pole > 0.0)) {
    throw std::invalid_argument("sim: deriv_filter_pole must be positive");
  }
  if (cfg.controller_mode == ControllerMode::Sampled &&
      cfg.dt > 1.0 / (10.0 * cfg.sample_hz)) {
    throw std::invalid_argument(
        "sim: Sampled mode requires dt <= 1/(10*sample_hz) so the hold is "
        "resolved");
  }
}

}  // namespace

DivergenceError::DivergenceError(double time)
    : std::runtime_error([time] {
        char buf[64];
        std::snprintf(buf, sizeof buf, "simulation diverged at t = %.9g s",
                      time);
        return std::string(buf);
      }()),
      time_(time) {}

Trace simulate(const model::SecondOrderPlant& nominal, const SimConfig& cfg,
               const model::SCurveSpec& spec, const lmi::PidGains& pid) {
  check_config(cfg);
  const model::SecondOrderPlant truth = model::perturbed(
      nominal, cfg.true_dm * nominal.m, cfg.true_dd * nominal.d);

  const auto [az, cz] = model::scurve_matrices(spec);
  const Eigen::Matrix3d ehalf = linalg::expm(az * (0.5 * cfg.dt));
  Eigen::Vector3d rho = spec.rho0;

  const long long nsteps = std::llround(cfg.duration / cfg.dt);
  Trace tr;
  for (auto* col : {&tr.t, &tr.r, &tr.y, &tr.e, &tr.edot, &tr.u_ff, &tr.u_fb,
                    &tr.udot_fb, &tr.w}) {
    col->reserve(static_cast<std::size_t>(nsteps) + 1);
  }

  std::mt19937_64 gen(cfg.seed);
  const bool sampled = cfg.controller_mode == ControllerMode::Sampled;
  const double tick_period = 1.0 / cfg.sample_hz;

  // Plant + controller state.
  const RefSample q0 = ref_from_state(rho, spec.offset);
  double y = q0.r;
  double v = q0.rdot;
  double integ = cfg.integrator0;
  double w_held = 0.0;

  // Sampled-controller state.
  double ufb_held = 0.0;
  double uff_held = 0.0;
  double udot_held = 0.0;
  double filt = 0.0;        // filtered-derivative output
  double filt_prev_e = 0.0; // previous tick error sample
  bool first_tick = true;
  double last_e_sample = 0.0;
  long long tick_idx = 0;

  const double uff_gain = cfg.feedforward ? 1.0 : 0.0;
  const auto uff_at = [&](const RefSample& q) {
    return uff_gain * (nominal.m * q.rddot + nominal.d * q.rdot);
  };

  // Continuous-mode stage derivative: state (y, v, I) under exact e, e'.
  struct Deriv {
    double dy, dv, di;
  };
  const auto stage = [&](double sy, double sv, double si, const RefSample& q) {
    const double e = q.r - sy;
    const double edot = q.rdot - sv;
    const double ufb = pid.kp * e + pid.ki * si + pid.kd * edot;
    const double u = uff_at(q) + ufb + w_held;
    return Deriv{sv, (u - truth.d * sv) / truth.m, e};
  };

  for (long long i = 0; i <= nsteps; ++i) {
    const double t = static_cast<double>(i) * cfg.dt;
    const RefSample q = ref_from_state(rho, spec.offset);

    // Controller ticks due at (or nearest to) this sample.
    while (static_cast<double>(tick_idx) * tick_period < t + 0.5 * cfg.dt) {
      if (cfg.force_noise_amp > 0.0) {
        w_held = draw_noise(gen, cfg.force_noise_amp);
      }
      if (sampled) {
        const double e_k = q.r - y;
        if (first_tick) {
          filt_prev_e = e_k;
          first_tick = false;
        } else {
          integ += tick_period * 0.5 * (e_k + last_e_sample);
        }
        const double a = 2.0 / tick_period;
        filt = (cfg.deriv_filter_pole * a * (e_k - filt_prev_e) +
                (a - cfg.deriv_filter_pole) * filt) /
               (a + cfg.deriv_filter_pole);
        filt_prev_e = e_k;
        last_e_sample = e_k;
        const double ufb_new =
            pid.kp * e_k + pid.ki * integ + pid.kd * filt;
        udot_held = (ufb_new - ufb_held) / tick_period;
        ufb_held = ufb_new;
        uff_held = uff_at(q);
      }
      ++tick_idx;
    }

    // Record the row for time t.
    const double e = q.r - y;
    const double edot = q.rdot - v;
    double uff_row, ufb_row, udot_row;
    if (sampled) {
      uff_row = uff_held;
      ufb_row = ufb_held;
      udot_row = udot_held;
    } else {
      uff_row = uff_at(q);
      ufb_row = pid.kp * e + pid.ki * integ + pid.kd * edot;
      const double vdot =
          (uff_row + ufb_row + w_held - truth.d * v) / truth.m;
      udot_row = pid.kp * edot + pid.ki * e + pid.kd * (q.rddot - vdot);
    }
    tr.t.push_back(t);
    tr.r.push_back(q.r);
    tr.y.push_back(y);
    tr.e.push_back(e);
    tr.edot.push_back(edot);
    tr.u_ff.push_back(uff_row);
    tr.u_fb.push_back(ufb_row);
    tr.udot_fb.push_back(udot_row);
    tr.w.push_back(w_held);

    if (i == nsteps) break;

    // One RK4 step from t to t + dt.
    const Eigen::Vector3d rho_mid = ehalf * rho;
    const Eigen::Vector3d rho_end = ehalf * rho_mid;
    const double h = cfg.dt;
    if (sampled) {
      const double u = uff_held + ufb_held + w_held;
      const auto f = [&](double sv) { return (u - truth.d * sv) / truth.m; };
      const double k1y = v, k1v = f(v);
      const double k2y = v + 0.5 * h * k1v, k2v = f(k2y);
      const double k3y = v + 0.5 * h * k2v, k3v = f(k3y);
      const double k4y = v + h * k3v, k4v = f(k4y);
      y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    } else {
      const RefSample qm = ref_from_state(rho_mid, spec.offset);
      const RefSample qe = ref_from_state(rho_end, spec.offset);
      const Deriv k1 = stage(y, v, integ, q);
      const Deriv k2 = stage(y + 0.5 * h * k1.dy, v + 0.5 * h * k1.dv,
                             integ + 0.5 * h * k1.di, qm);
      const Deriv k3 = stage(y + 0.5 * h * k2.dy, v + 0.5 * h * k2.dv,
                             integ + 0.5 * h * k2.di, qm);
      const Deriv k4 =
          stage(y + h * k3.dy, v + h * k3.dv, integ + h * k3.di, qe);
      y += h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
      v += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
      integ += h / 6.0 * (k1.di + 2.0 * k2.di + 2.0 * k3.di + k4.di);
    }
    rho = rho_end;

    if (!std::isfinite(y) || !std::isfinite(v) || !std::isfinite(integ) ||
        std::abs(y) > kDivergeBound) {
      throw DivergenceError(static_cast<double>(i + 1) * cfg.dt);
    }
  }
  return tr;
}

double rms(const std::vector<double>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("rms: empty series");
  }
  double acc = 0.0;
  for (const double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

std::vector<double> filtered_derivative(const std::vector<double>& x,
                                        double dt, double pole) {
  if (!(dt > 0.0) || !(pole > 0.0)) {
    throw std::invalid_argument(
        "filtered_derivative: dt and pole must be positive");
  }
  std::vector<double> out(x.size(), 0.0);
  if (x.empty()) return out;
  const double a = 2.0 / dt;
  double xp = x[0];
  double yp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    yp = (pole * a * (x[i] - xp) + (a - pole) * yp) / (a + pole);
    xp = x[i];
    out[i] = yp;
  }
  return out;
}

RmsSummary summarize(const Trace& trace) {
  RmsSummary s;
  if (trace.t.empty()) return s;
  constexpr double kMeasurementPole = 100.0;  // rad/s, fixed convention
  const double dt = trace.t.size() >= 2 ? trace.t[1] - trace.t[0] : 1.0;
  s.rms_e = rms(trace.e);
  s.rms_edot = rms(filtered_derivative(trace.e, dt, kMeasurementPole));
  s.rms_udotfb = rms(filtered_derivative(trace.u_fb, dt, kMeasurementPole));
  return s;
}

void write_csv(const Trace& trace, std::ostream& os) {
  os << "t,r,y,e,edot,u_ff,u_fb,udot_fb,w\n";
  char buf[32];
  const auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << sep;
  };
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    put(trace.t[i], ',');
    put(trace.r[i], ',');
    put(trace.y[i], ',');
    put(trace.e[i], ',');
    put(trace.edot[i], ',');
    put(trace.u_ff[i], ',');
    put(trace.u_fb[i], ',');
    put(trace.udot_fb[i], ',');
    put(trace.w[i], '\n');
  }
}

}  // namespace pidsyn::sim
