#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "pidsyn/lmi.hpp"
#include "pidsyn/model.hpp"

namespace pidsyn::sim {

enum class ControllerMode { Continuous, Sampled };

// Scenario description for one closed-loop run.  The plant actually
// integrated is the nominal one perturbed by the fractional (true_dm,
// true_dd); the controller always uses the nominal model (feedforward) and
// the supplied PID gains (feedback on the control-rate channel's integral).
struct SimConfig {
  double duration = 3.0;  // s
  double dt = 1e-5;       // integration step, s
  double true_dm = 0.0;   // fractional mass perturbation of the true plant
  double true_dd = 0.0;   // fractional damping perturbation
  double force_noise_amp = 0.0;  // N; uniform in [-amp, amp], 0 disables
  std::uint64_t seed = 0;        // noise generator seed
  ControllerMode controller_mode = ControllerMode::Continuous;
  double sample_hz = 2500.0;        // controller tick rate
  double deriv_filter_pole = 100.0;  // rad/s, sampled derivative estimate
  bool feedforward = true;           // ablation switch
  double integrator0 = 0.0;          // initial PID integrator content
};

// Uniformly sampled run history.  e = r - y holds at every sample by
// construction; edot is the true error rate r' - y'.
struct Trace {
  std::vector<double> t;
  std::vector<double> r;
  std::vector<double> y;
  std::vector<double> e;
  std::vector<double> edot;
  std::vector<double> u_ff;
  std::vector<double> u_fb;
  std::vector<double> udot_fb;
  std::vector<double> w;
};

struct RmsSummary {
  double rms_e = 0.0;      // m
  double rms_edot = 0.0;   // m/s, through the measurement filter
  double rms_udotfb = 0.0; // through the measurement filter
};

// Non-finite state or |y| > 1e6 m during integration.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(double time);
  [[nodiscard]] double time() const noexcept { return time_; }

 private:
  double time_ = 0.0;
};

// Integrates the true plant (m+dm) y'' = u + w - (d+dd) y' under the 2-DoF
// law u = u_ff + u_fb with classical fixed-step 4th-order Runge-Kutta.  The
// reference generator is propagated exactly (matrix exponential) alongside.
// Continuous mode evaluates the PID feedback inside the integrator stages
// with exact e and e'; Sampled mode recomputes u_ff and u_fb at sample_hz
// ticks, holds them between ticks, estimates e' with the bilinear-discretized
// filtered differentiator pole*s/(s+pole), and accumulates the integral by
// the trapezoid rule on tick samples.  Force noise is redrawn at controller
// ticks in both modes and held.  The plant starts on the reference
// (y = r(0), y' = r'(0)).
// Throws std::invalid_argument on bad configuration (including dt not
// resolving the hold: Sampled requires dt <= 1/(10*sample_hz)) and
// DivergenceError when the state leaves the finite |y| <= 1e6 box.
[[nodiscard]] Trace simulate(const model::SecondOrderPlant& nominal,
                             const SimConfig& cfg,
                             const model::SCurveSpec& spec,
                             const lmi::PidGains& pid);

// Root mean square with uniform sample weights.
// Throws std::invalid_argument on an empty series.
[[nodiscard]] double rms(const std::vector<double>& samples);

// Bilinear-discretized filtered differentiator pole*s/(s+pole) applied to a
// uniformly sampled series; starts at rest on the first sample.
[[nodiscard]] std::vector<double> filtered_derivative(
    const std::vector<double>& x, double dt, double pole);

// RMS of raw e and of the measurement chain (100 rad/s filtered
// differentiator, the fixed reporting convention) applied to e and u_fb.
[[nodiscard]] RmsSummary summarize(const Trace& trace);

// CSV export: fixed header t,r,y,e,edot,u_ff,u_fb,udot_fb,w then one row per
// sample, 17 significant digits, LF line endings.
void write_csv(const Trace& trace, std::ostream& os);

}  // namespace pidsyn::sim
