#include "pidsyn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace pidsyn::model {

std::pair<Eigen::Matrix3d, Eigen::RowVector3d> scurve_matrices(
    const SCurveSpec& spec) {
  Eigen::Matrix3d az = Eigen::Matrix3d::Zero();
  az(0, 1) = 1.0;
  az(1, 2) = 1.0;
  az(2, 0) = spec.z1;
  az(2, 1) = spec.z2;
  az(2, 2) = spec.z3;
  if (linalg::spectral_abscissa(az) >= 0.0) {
    throw std::invalid_argument(
        "scurve_matrices: reference generator must be Hurwitz "
        "(all eigenvalues of Az strictly in the left half-plane)");
  }
  Eigen::RowVector3d cz(1.0, 0.0, 0.0);
  return {az, cz};
}

namespace {

ReferenceSample sample_from_state(const SCurveSpec& spec,
                                  const Eigen::Vector3d& rho) {
  ReferenceSample s;
  s.r = rho(0) + spec.offset;
  s.rdot = rho(1);
  s.rddot = rho(2);
  s.rdddot = spec.z1 * rho(0) + spec.z2 * rho(1) + spec.z3 * rho(2);
  return s;
}

}  // namespace

std::vector<ReferenceSample> reference_trajectory(const SCurveSpec& spec,
                                                  double duration, double dt) {
  if (!(duration >= 0.0) || !(dt > 0.0)) {
    throw std::invalid_argument(
        "reference_trajectory: duration must be >= 0 and dt > 0");
  }
  const auto [az, cz] = scurve_matrices(spec);
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  const Eigen::Matrix3d phi = linalg::expm(az * dt);

  std::vector<ReferenceSample> out;
  out.reserve(n + 1);
  Eigen::Vector3d rho = spec.rho0;
  out.push_back(sample_from_state(spec, rho));
  for (std::size_t i = 0; i < n; ++i) {
    rho = phi * rho;
    out.push_back(sample_from_state(spec, rho));
  }
  return out;
}

std::vector<ReferenceSample> reference_trajectory(
    const SCurveSpec& spec, const std::vector<double>& t_grid) {
  if (t_grid.empty()) {
    throw std::invalid_argument("reference_trajectory: time grid is empty");
  }
  if (t_grid.front() != 0.0) {
    throw std::invalid_argument(
        "reference_trajectory: time grid must start at t = 0");
  }
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw std::invalid_argument(
          "reference_trajectory: time grid must be strictly ascending");
    }
  }
  const auto [az, cz] = scurve_matrices(spec);

  std::vector<ReferenceSample> out;
  out.reserve(t_grid.size());
  Eigen::Vector3d rho = spec.rho0;
  out.push_back(sample_from_state(spec, rho));
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    rho = linalg::expm(az * (t_grid[i] - t_grid[i - 1])) * rho;
    out.push_back(sample_from_state(spec, rho));
  }
  return out;
}

ReferenceSample reference_at(const SCurveSpec& spec, double t) {
  const auto [az, cz] = scurve_matrices(spec);
  const Eigen::Vector3d rho = linalg::expm(az * t) * spec.rho0;
  return sample_from_state(spec, rho);
}

double feedforward(const SecondOrderPlant& plant, double rdot, double rddot) {
  return plant.m * rddot + plant.d * rdot;
}

SecondOrderPlant perturbed(const SecondOrderPlant& plant, double dm,
                           double dd) {
  if (!(plant.m + dm > 0.0)) {
    throw std::invalid_argument("perturbed: mass m + dm must be positive");
  }
  return SecondOrderPlant{plant.m + dm, plant.d + dd};
}

AugmentedSystem build_augmented(const SecondOrderPlant& nominal, double dm,
                                double dd, const SCurveSpec& spec,
                                const WeightSpec& weights) {
  const SecondOrderPlant p = perturbed(nominal, dm, dd);  // validates mass
  (void)scurve_matrices(spec);                            // validates Hurwitz

  AugmentedSystem sys;
  // Reference chain: p' = v, v' = a, a' = z1 p + z2 v + z3 a.
  sys.A(0, 1) = 1.0;
  sys.A(1, 2) = 1.0;
  sys.A(2, 0) = spec.z1;
  sys.A(2, 1) = spec.z2;
  sys.A(2, 2) = spec.z3;
  // Error chain: e' and e'' integrators, then the mismatch dynamics row.
  sys.A(3, 4) = 1.0;
  sys.A(4, 5) = 1.0;
  sys.A(5, 0) = spec.z1 * dm / p.m;
  sys.A(5, 1) = spec.z2 * dm / p.m;
  sys.A(5, 2) = (spec.z3 * dm + dd) / p.m;
  sys.A(5, 5) = -p.d / p.m;

  sys.B1 = Matrix6d::Identity();
  sys.B2(5) = -1.0 / p.m;

  sys.C(0, 3) = weights.q1;
  sys.C(1, 4) = weights.q2;
  sys.C(2, 5) = weights.q3;
  sys.D(3) = weights.r;
  return sys;
}

std::array<AugmentedSystem, 4> polytope_vertices(const SecondOrderPlant& nominal,
                                                 const UncertaintyBox& box,
                                                 const SCurveSpec& spec,
                                                 const WeightSpec& weights) {
  if (!(box.dm_lo <= box.dm_hi) || !(box.dd_lo <= box.dd_hi)) {
    throw std::invalid_argument(
        "polytope_vertices: uncertainty box bounds must be ordered");
  }
  const double dm[2] = {box.dm_lo * nominal.m, box.dm_hi * nominal.m};
  const double dd[2] = {box.dd_lo * nominal.d, box.dd_hi * nominal.d};
  return {build_augmented(nominal, dm[0], dd[0], spec, weights),
          build_augmented(nominal, dm[0], dd[1], spec, weights),
          build_augmented(nominal, dm[1], dd[0], spec, weights),
          build_augmented(nominal, dm[1], dd[1], spec, weights)};
}

WrenchAllocator::WrenchAllocator(double arm_length_in)
    : arm_length(arm_length_in) {
  if (!(arm_length > 0.0)) {
    throw std::invalid_argument("WrenchAllocator: arm length must be positive");
  }
  const double L = arm_length;
  // Rows: Fx, Fy, Fz, Tx, Ty, Tz.  Columns: F1x F1z F2y F2z F3x F3z F4y F4z.
  M << 0, 0, 1, 0, 0, 0, 1, 0,
       1, 0, 0, 0, 1, 0, 0, 0,
       0, 1, 0, 1, 0, 1, 0, 1,
       0, 0, 0, -L, 0, 0, 0, L,
       0, -L, 0, 0, 0, L, 0, 0,
       L, 0, -L, 0, -L, 0, L, 0;
}

Vector8d WrenchAllocator::allocate(const Vector6d& wrench) const {
  const Matrix6d gram = M * M.transpose();
  Eigen::LDLT<Matrix6d> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw std::runtime_error("allocate: force map Gram matrix is singular");
  }
  return M.transpose() * ldlt.solve(wrench);
}

Vector6d WrenchAllocator::compose(const Vector8d& forces) const {
  return M * forces;
}

Vector8d allocate_forces(const Vector6d& wrench, double arm_length) {
  return WrenchAllocator(arm_length).allocate(wrench);
}

Vector6d compose_wrench(const Vector8d& forces, double arm_length) {
  return WrenchAllocator(arm_length).compose(forces);
}

}  // namespace pidsyn::model
