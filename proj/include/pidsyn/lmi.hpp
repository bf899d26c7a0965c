#pragma once

#include "pidsyn/linalg.hpp"
#include "pidsyn/model.hpp"

namespace pidsyn::lmi {

// Lifted data of the rate-augmented synthesis problem.  The six-state model
// x' = A x + B2 u' + B1 w with output z = C x + D u' is lifted by appending
// xi = -u' as a seventh coordinate:
//   F = [[A, -B2], [0, 0]],  G = [0; 1],
//   Q = blkdiag(B1 B1^T, 0),  R = blkdiag(C^T C, D^T D).
// Rhalf is the symmetric PSD square root of R.
struct LiftedData {
  Matrix7d F = Matrix7d::Zero();
  Vector7d G = Vector7d::Zero();
  Matrix7d Q = Matrix7d::Zero();
  Matrix7d R = Matrix7d::Zero();
  Matrix7d Rhalf = Matrix7d::Zero();
};

// Candidate certificate: a structured 7x7 decision matrix
//   W = [[W1, W2], [W2^T, W3]]
// together with the inverse-performance scalar mu = 1/gamma^2.
struct Certificate {
  Matrix6d W1 = Matrix6d::Zero();
  Vector6d W2 = Vector6d::Zero();
  double W3 = 0.0;
  double mu = 0.0;

  [[nodiscard]] Matrix7d W() const;
};

// Blocks of the projected Bellman-like operator
//   Theta(W, mu) = F W + W F^T + W R W + mu Q
// partitioned like W.  theta1 is the leading 6x6 block the synthesis
// condition constrains; the remaining blocks are reported for diagnostics.
struct ThetaBlocks {
  Matrix6d theta1 = Matrix6d::Zero();
  Vector6d theta2 = Vector6d::Zero();
  double theta3 = 0.0;

  [[nodiscard]] Matrix7d assemble() const;
};

// State-feedback gain u' = -k x recovered from a certificate.
struct GainVector {
  RowVector6d k = RowVector6d::Zero();
};

// PID parameters of the recovered tracking controller
// u_fb = kp e + ki int(e) + kd e'.
struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
};

// Lifted (F, G, Q, R, R^1/2) for an augmented model.
[[nodiscard]] LiftedData build_fqr(const model::AugmentedSystem& sys);

// Theta(W, mu) blocks for a candidate certificate.
[[nodiscard]] ThetaBlocks theta(const Certificate& cert,
                                const LiftedData& lifted);

// The twelve entries that the sparsity constraint pins to zero, as a 3x4
// matrix [W1(0:2, 3:5) | W2(0:2)].  A structured certificate has an exactly
// zero residual.
[[nodiscard]] Eigen::Matrix<double, 3, 4> sparsity_residual(
    const Certificate& cert);

// Gain recovery k = W2^T W1^{-1}.  Exploits the sparsity structure when the
// residual is exactly zero so that the recovered gain is exactly zero in its
// first three entries.  Throws std::invalid_argument when W1 is not positive
// definite.
[[nodiscard]] GainVector extract_gain(const Certificate& cert);

// PID parameters from a structured gain: ki = -k4, kp = -k5, kd = -k6.
// Throws std::invalid_argument when the gain acts on the reference states
// (k1..k3 nonzero), since such a gain has no PID realization.
[[nodiscard]] PidGains to_pid(const GainVector& gain);

// 13x13 Schur-complement form of theta1(W, mu) <= 0:
//   [[-V F W V^T - V W F^T V^T - mu V Q V^T,  V W R^1/2],
//    [R^1/2 W V^T,                            I]]  >= 0
// with V = [I6 0] the projection onto the state block.
[[nodiscard]] Matrix13d schur_lmi(const Certificate& cert,
                                  const LiftedData& lifted);

}  // namespace pidsyn::lmi
