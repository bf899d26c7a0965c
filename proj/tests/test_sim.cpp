#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pidsyn/sim.hpp"

using namespace pidsyn;

namespace {

model::SecondOrderPlant default_plant() { return {1.0 / 400.0, 1.0 / 200.0}; }

model::SCurveSpec default_scurve() {
  model::SCurveSpec s;
  s.z1 = -125.0;
  s.z2 = -75.0;
  s.z3 = -15.0;
  s.rho0 = Eigen::Vector3d(-2e-5, 0.0, 0.0);
  s.offset = 2e-5;
  return s;
}

lmi::PidGains design_pid() { return {47.71, 1664.71, 0.50}; }

sim::SimConfig sampled_config() {
  sim::SimConfig c;
  c.controller_mode = sim::ControllerMode::Sampled;
  return c;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("nominal run tracks to sub-nanometer error and settles") {
  const auto tr = sim::simulate(default_plant(), sampled_config(),
                                default_scurve(), design_pid());
  REQUIRE(tr.t.size() == 300001);
  CHECK(tr.t.front() == 0.0);
  CHECK(tr.t.back() == doctest::Approx(3.0).epsilon(1e-12));
  // e is r - y by construction at every sample.
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.e.size(); ++i) {
    worst = std::max(worst, std::abs(tr.e[i] - (tr.r[i] - tr.y[i])));
  }
  CHECK(worst == 0.0);
  // Exact feedforward leaves only the sampling residue.
  CHECK(max_abs(tr.e) == doctest::Approx(2.5794479678949565e-11).epsilon(1e-9));
  CHECK(std::abs(tr.e.back()) < 1e-12);
  CHECK(max_abs(tr.w) == 0.0);
  const auto s = sim::summarize(tr);
  CHECK(s.rms_e == doctest::Approx(2.0379242148066895e-12).epsilon(1e-9));
  CHECK(s.rms_edot == doctest::Approx(1.3301100715324026e-10).epsilon(1e-9));
  CHECK(s.rms_udotfb == doctest::Approx(1.104738122808376e-08).epsilon(1e-9));
}

TEST_CASE("thirty percent model error stays stable and bounded") {
  auto c = sampled_config();
  c.true_dm = 0.3;
  c.true_dd = 0.3;
  const auto tr =
      sim::simulate(default_plant(), c, default_scurve(), design_pid());
  const auto s = sim::summarize(tr);
  CHECK(s.rms_e == doctest::Approx(1.1539298217784219e-10).epsilon(1e-9));
  CHECK(max_abs(tr.e) ==
        doctest::Approx(6.9123939518446673e-10).epsilon(1e-9));
  // The output never leaves the vicinity of the 20 micrometer move.
  CHECK(max_abs(tr.y) < 2.1e-5);
  CHECK(std::abs(tr.e.back()) < 1e-11);
}

TEST_CASE("force noise strictly degrades every reported channel") {
  const auto clean = sim::summarize(sim::simulate(
      default_plant(), sampled_config(), default_scurve(), design_pid()));
  auto c = sampled_config();
  c.force_noise_amp = 0.05;
  const auto tr =
      sim::simulate(default_plant(), c, default_scurve(), design_pid());
  CHECK(max_abs(tr.w) <= 0.05);
  CHECK(max_abs(tr.w) > 0.04);
  const auto s = sim::summarize(tr);
  CHECK(s.rms_e == doctest::Approx(0.00021039536708991605).epsilon(1e-9));
  CHECK(s.rms_e > clean.rms_e);
  CHECK(s.rms_edot > clean.rms_edot);
  CHECK(s.rms_udotfb > clean.rms_udotfb);

  c.true_dm = 0.3;
  c.true_dd = 0.3;
  const auto sp = sim::summarize(
      sim::simulate(default_plant(), c, default_scurve(), design_pid()));
  CHECK(sp.rms_e == doctest::Approx(0.00020154326339175095).epsilon(1e-9));
}

TEST_CASE("noise is reproducible by seed and varies across seeds") {
  auto c = sampled_config();
  c.force_noise_amp = 0.05;
  const auto t1 =
      sim::simulate(default_plant(), c, default_scurve(), design_pid());
  const auto t2 =
      sim::simulate(default_plant(), c, default_scurve(), design_pid());
  CHECK(std::equal(t1.e.begin(), t1.e.end(), t2.e.begin()));
  CHECK(std::equal(t1.w.begin(), t1.w.end(), t2.w.begin()));
  c.seed = 1;
  const auto t3 =
      sim::simulate(default_plant(), c, default_scurve(), design_pid());
  CHECK(!std::equal(t1.w.begin(), t1.w.end(), t3.w.begin()));
  CHECK(sim::summarize(t3).rms_e != sim::summarize(t1).rms_e);
}

TEST_CASE("sampled controller converges in the integration step") {
  auto c = sampled_config();
  c.feedforward = false;  // leaves a resolvable tracking error
  const auto coarse = sim::summarize(
      sim::simulate(default_plant(), c, default_scurve(), design_pid()));
  c.dt = 5e-6;
  const auto fine = sim::summarize(
      sim::simulate(default_plant(), c, default_scurve(), design_pid()));
  CHECK(coarse.rms_e ==
        doctest::Approx(3.8228351055480479e-10).epsilon(1e-9));
  CHECK(std::abs(fine.rms_e - coarse.rms_e) <= 1e-4 * coarse.rms_e);
}

TEST_CASE("hold effects stay within a few percent of the continuous law") {
  // With exact feedforward both modes sit at numerical zero, so the
  // comparison runs feedback-only.
  sim::SimConfig cont;
  cont.feedforward = false;
  const auto sc = sim::summarize(sim::simulate(default_plant(), cont,
                                               default_scurve(),
                                               design_pid()));
  auto samp = sampled_config();
  samp.feedforward = false;
  const auto ss = sim::summarize(sim::simulate(default_plant(), samp,
                                               default_scurve(),
                                               design_pid()));
  CHECK(sc.rms_e == doctest::Approx(3.9047014308198816e-10).epsilon(1e-9));
  CHECK(std::abs(sc.rms_e - ss.rms_e) <= 0.05 * sc.rms_e);
}

TEST_CASE("feedforward ablation costs two orders of magnitude") {
  const auto with_ff = sim::summarize(sim::simulate(
      default_plant(), sampled_config(), default_scurve(), design_pid()));
  auto c = sampled_config();
  c.feedforward = false;
  const auto without = sim::summarize(
      sim::simulate(default_plant(), c, default_scurve(), design_pid()));
  CHECK(without.rms_e > 10.0 * with_ff.rms_e);
}

TEST_CASE("zero reference with no noise is exactly quiescent") {
  auto spec = default_scurve();
  spec.rho0.setZero();
  spec.offset = 0.0;
  const auto tr =
      sim::simulate(default_plant(), sampled_config(), spec, design_pid());
  CHECK(max_abs(tr.y) == 0.0);
  CHECK(max_abs(tr.e) == 0.0);
  CHECK(max_abs(tr.u_ff) == 0.0);
  CHECK(max_abs(tr.u_fb) == 0.0);
}

TEST_CASE("runaway gains raise a divergence error with the crossing time") {
  const lmi::PidGains huge{4725305155644.5537, 629069845150870.5,
                           16364984072.991524};
  bool threw = false;
  try {
    (void)sim::simulate(default_plant(), sampled_config(), default_scurve(),
                        huge);
  } catch (const sim::DivergenceError& e) {
    threw = true;
    CHECK(e.time() == doctest::Approx(0.00121).epsilon(1e-9));
  }
  CHECK(threw);
}

TEST_CASE("configuration validation rejects unusable grids") {
  auto c = sampled_config();
  c.dt = 0.0;
  CHECK_THROWS_AS((void)sim::simulate(default_plant(), c, default_scurve(),
                                      design_pid()),
                  std::invalid_argument);
  c = sampled_config();
  c.duration = 1e-6;  // shorter than one step
  CHECK_THROWS_AS((void)sim::simulate(default_plant(), c, default_scurve(),
                                      design_pid()),
                  std::invalid_argument);
  c = sampled_config();
  c.dt = 1e-3;  // cannot resolve the 2500 Hz hold
  CHECK_THROWS_AS((void)sim::simulate(default_plant(), c, default_scurve(),
                                      design_pid()),
                  std::invalid_argument);
}

TEST_CASE("rms matches closed forms") {
  CHECK(sim::rms({3.0, 4.0}) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  std::vector<double> sine(100000);
  for (std::size_t i = 0; i < sine.size(); ++i) {
    sine[i] = 2.0 * std::sin(2.0 * M_PI * static_cast<double>(i) / 1000.0);
  }
  CHECK(sim::rms(sine) == doctest::Approx(2.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK_THROWS_AS((void)sim::rms({}), std::invalid_argument);
}

TEST_CASE("filtered derivative kills constants and recovers ramp slopes") {
  const std::vector<double> flat(1000, 7.5);
  for (double v : sim::filtered_derivative(flat, 1e-3, 100.0)) {
    CHECK(v == 0.0);
  }
  std::vector<double> ramp(5000);
  for (std::size_t i = 0; i < ramp.size(); ++i) {
    ramp[i] = 1e-3 * static_cast<double>(i);
  }
  const auto d = sim::filtered_derivative(ramp, 1e-3, 100.0);
  CHECK(d.front() == 0.0);  // starts at rest
  CHECK(d.back() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("summary equals the documented measurement chain") {
  auto c = sampled_config();
  c.force_noise_amp = 0.05;
  const auto tr =
      sim::simulate(default_plant(), c, default_scurve(), design_pid());
  const auto s = sim::summarize(tr);
  const double dt = tr.t[1] - tr.t[0];
  CHECK(s.rms_e == sim::rms(tr.e));
  CHECK(s.rms_edot == sim::rms(sim::filtered_derivative(tr.e, dt, 100.0)));
  CHECK(s.rms_udotfb ==
        sim::rms(sim::filtered_derivative(tr.u_fb, dt, 100.0)));
}

TEST_CASE("csv export uses the fixed header and full precision") {
  sim::Trace tr;
  tr.t = {0.0, 0.1};
  tr.r = {0.5, 0.25};
  tr.y = {0.5, 0.2};
  tr.e = {0.0, 0.05};
  tr.edot = {0.0, 0.0};
  tr.u_ff = {0.0, 0.0};
  tr.u_fb = {0.0, 0.0};
  tr.udot_fb = {0.0, 0.0};
  tr.w = {0.0, 0.0};
  std::ostringstream os;
  sim::write_csv(tr, os);
  const std::string text = os.str();
  CHECK(text.rfind("t,r,y,e,edot,u_ff,u_fb,udot_fb,w\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  // 0.1 is not binary-exact: full precision must survive.
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("\r") == std::string::npos);
}
