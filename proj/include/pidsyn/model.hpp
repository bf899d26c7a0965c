#pragma once

#include <array>
#include <vector>

#include "pidsyn/linalg.hpp"

namespace pidsyn::model {

// Lumped one-axis rigid-body plant  (m + dm) y'' + (d + dd) y' = u.
// Mass and damping are the per-unit-mass lumped values of the levitated
// mover along one translational axis.
struct SecondOrderPlant {
  double m = 0.0;  // lumped mass [kg]
  double d = 0.0;  // lumped viscous damping [N s/m]
};

// Box of relative (fractional) perturbations on plant mass and damping.
struct UncertaintyBox {
  double dm_lo = 0.0;
  double dm_hi = 0.0;
  double dd_lo = 0.0;
  double dd_hi = 0.0;
};

// Third-order S-curve reference generator rho' = Az rho, r = rho_1 + offset,
// with Az in companion form (bottom row z1, z2, z3).  All trajectories decay
// to the set-point `offset` when Az is Hurwitz.
struct SCurveSpec {
  double z1 = 0.0;
  double z2 = 0.0;
  double z3 = 0.0;
  Eigen::Vector3d rho0 = Eigen::Vector3d::Zero();  // initial (p, v, a)
  double offset = 0.0;                             // set-point added to rho_1
};

// Performance weights: q1..q3 penalize e, e', e''; r penalizes the control
// rate in the lifted formulation.
struct WeightSpec {
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double r = 0.0;
};

// Six-state augmented design model x = [p, p', p'', e, e', e''] driven by
// the control rate, with full-state disturbance entry B1 = I and weighted
// performance output z = C x + D u'.
struct AugmentedSystem {
  Matrix6d A = Matrix6d::Zero();
  Matrix6d B1 = Matrix6d::Zero();
  Vector6d B2 = Vector6d::Zero();
  Matrix46d C = Matrix46d::Zero();
  Vector4d D = Vector4d::Zero();
};

// One reference sample: position, velocity, acceleration, jerk.
struct ReferenceSample {
  double r = 0.0;
  double rdot = 0.0;
  double rddot = 0.0;
  double rdddot = 0.0;
};

// Companion pair (Az, Cz) of the reference generator.
// Throws std::invalid_argument when Az is not Hurwitz.
[[nodiscard]] std::pair<Eigen::Matrix3d, Eigen::RowVector3d> scurve_matrices(
    const SCurveSpec& spec);

// Reference and its first three derivatives on the uniform grid
// t = 0, dt, ..., n*dt with n = round(duration/dt).  The generator state is
// propagated exactly with the matrix exponential of Az*dt; jerk follows from
// the companion bottom row.
[[nodiscard]] std::vector<ReferenceSample> reference_trajectory(
    const SCurveSpec& spec, double duration, double dt);

// Reference and derivatives on an arbitrary ascending grid starting at 0.
// Throws std::invalid_argument when the grid is empty, does not start at
// t = 0, or is not strictly ascending.
[[nodiscard]] std::vector<ReferenceSample> reference_trajectory(
    const SCurveSpec& spec, const std::vector<double>& t_grid);

// Reference sample at an arbitrary time (exact matrix-exponential propagation).
[[nodiscard]] ReferenceSample reference_at(const SCurveSpec& spec, double t);

// Model-based feedforward u_ff = m r'' + d r' for the nominal plant.
[[nodiscard]] double feedforward(const SecondOrderPlant& plant, double rdot,
                                 double rddot);

// Plant with absolute perturbations applied: (m + dm, d + dd).
// Throws std::invalid_argument when the perturbed mass is not positive.
[[nodiscard]] SecondOrderPlant perturbed(const SecondOrderPlant& plant,
                                         double dm, double dd);

// Augmented design model for the plant perturbed by the absolute (dm, dd),
// reference dynamics `spec`, and performance weights `weights`.
[[nodiscard]] AugmentedSystem build_augmented(const SecondOrderPlant& nominal,
                                              double dm, double dd,
                                              const SCurveSpec& spec,
                                              const WeightSpec& weights);

// The four polytope vertex systems, in the fixed order
// (lo,lo), (lo,hi), (hi,lo), (hi,hi) of (dm, dd) box corners.
[[nodiscard]] std::array<AugmentedSystem, 4> polytope_vertices(
    const SecondOrderPlant& nominal, const UncertaintyBox& box,
    const SCurveSpec& spec, const WeightSpec& weights);

// Maps the eight coil forces of the four two-axis forcers to the global
// wrench [Fx, Fy, Fz, Tx, Ty, Tz] and back.  Local force order:
// [F1x, F1z, F2y, F2z, F3x, F3z, F4y, F4z].
struct WrenchAllocator {
  // Throws std::invalid_argument when the arm length is not positive.
  explicit WrenchAllocator(double arm_length);

  // Minimum-norm local forces realizing the commanded global wrench
  // (pseudo-inverse through the 6x6 Gram matrix M M^T).
  [[nodiscard]] Vector8d allocate(const Vector6d& wrench) const;

  // Global wrench produced by the given local forces: M * forces.
  [[nodiscard]] Vector6d compose(const Vector8d& forces) const;

  double arm_length = 0.0;
  Matrix68d M = Matrix68d::Zero();
};

// Convenience wrappers over WrenchAllocator for one-shot use.
[[nodiscard]] Vector8d allocate_forces(const Vector6d& wrench,
                                       double arm_length);
[[nodiscard]] Vector6d compose_wrench(const Vector8d& forces,
                                      double arm_length);

}  // namespace pidsyn::model
