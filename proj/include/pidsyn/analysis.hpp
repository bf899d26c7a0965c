#pragma once

#include <vector>

#include "pidsyn/lmi.hpp"
#include "pidsyn/linalg.hpp"
#include "pidsyn/model.hpp"

namespace pidsyn::analysis {

// Closed loop of the augmented model under the control-rate law u' = -K x:
// x' = Acl x + B1 w,  z = Ccl x.   The direct term D folds into Ccl, so the
// disturbance channel is strictly proper.
struct ClosedLoop {
  Matrix6d acl = Matrix6d::Zero();
  Matrix6d b1 = Matrix6d::Zero();
  Matrix46d ccl = Matrix46d::Zero();
};

[[nodiscard]] ClosedLoop closed_loop(const model::AugmentedSystem& aug,
                                     const lmi::GainVector& gain);

// Largest real part of the closed-loop spectrum (negative iff Hurwitz).
[[nodiscard]] double spectral_abscissa(const ClosedLoop& cl);

// H-infinity norm of w -> z computed by two independent methods.
//   grid:        dense log-frequency sweep (plus the DC point) refined by
//                golden-section search around the peak.
//   hamiltonian: gamma-bisection on imaginary-axis eigenvalues of the
//                Hamiltonian matrix, balanced before the eigensolve.
// `value` is the larger of the two.
struct HinfDetail {
  double grid = 0.0;
  double hamiltonian = 0.0;
  double value = 0.0;
};

// Throws std::invalid_argument when the closed loop is not Hurwitz and
// std::runtime_error when the two methods disagree by more than
// 10 * tol * value.
[[nodiscard]] HinfDetail hinf_detail(const ClosedLoop& cl, double tol = 1e-6);
[[nodiscard]] double hinf_norm(const ClosedLoop& cl, double tol = 1e-6);

// Largest eigenvalue of the Riccati operator
//   (A - B2 K)' P + P (A - B2 K) + gamma^-2 P B1 B1' P + (C - D K)' (C - D K);
// nonpositive iff P certifies the gamma-level disturbance attenuation.
[[nodiscard]] double riccati_residual(const model::AugmentedSystem& aug,
                                      const lmi::GainVector& gain,
                                      const Matrix6d& p, double gamma);

// Certificate validation report.  All slack checks are relative: a block
// passes when its violation does not exceed tol * max(1, |block|_2).
struct CertificateReport {
  bool psd_ok = false;       // W >= 0 within tolerance
  bool sparsity_ok = false;  // structural zeros within tolerance
  bool theta_ok = false;     // lambda_max(Theta1) <= slack at every vertex
  bool gain_ok = false;      // W1 invertible, gain extracted
  bool feasible = false;     // conjunction of the above and mu > 0
  double w_min_eig = 0.0;
  double sparsity_max = 0.0;          // largest |structural-zero entry|
  double gamma = 0.0;                 // 1/sqrt(mu)
  std::vector<double> theta_max;      // per-vertex lambda_max(Theta1)
  std::vector<double> theta_scale;    // per-vertex tolerance actually applied
  std::vector<double> schur_min;      // per-vertex lambda_min of the 13x13 form
  std::vector<double> abscissa;       // per-vertex closed-loop abscissa
  std::vector<double> hinf;           // per-vertex H-inf (NaN if not Hurwitz)
  lmi::GainVector gain;               // extracted gain (zero when !gain_ok)
};

// Validates W >= 0, the sparsity pattern, and Theta1(W, mu) <= 0 at every
// vertex, then reports closed-loop abscissa and H-infinity per vertex with
// the extracted gain.  `tol` selects the regime: ~1e-2 accepts certificates
// printed to a few significant digits, ~1e-9 is solver-grade.
[[nodiscard]] CertificateReport validate_certificate(
    const lmi::Certificate& cert,
    const std::vector<model::AugmentedSystem>& vertices, double tol);

// Closed-loop abscissa and H-infinity on a grid_n x grid_n lattice spanning
// the fractional uncertainty box.  hinf is NaN at non-Hurwitz points.
// Throws std::invalid_argument when grid_n < 2.
struct SweepPoint {
  double dm_frac = 0.0;
  double dd_frac = 0.0;
  double abscissa = 0.0;
  double hinf = 0.0;
};

[[nodiscard]] std::vector<SweepPoint> uncertainty_sweep(
    const model::SecondOrderPlant& nominal, const model::UncertaintyBox& box,
    const model::SCurveSpec& spec, const model::WeightSpec& weights,
    const lmi::GainVector& gain, int grid_n);

}  // namespace pidsyn::analysis
