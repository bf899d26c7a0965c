#include "pidsyn/lmi.hpp"

#include <stdexcept>

namespace pidsyn::lmi {

Matrix7d Certificate::W() const {
  Matrix7d w = Matrix7d::Zero();
  w.topLeftCorner<6, 6>() = W1;
  w.topRightCorner<6, 1>() = W2;
  w.bottomLeftCorner<1, 6>() = W2.transpose();
  w(6, 6) = W3;
  return w;
}

Matrix7d ThetaBlocks::assemble() const {
  Matrix7d t = Matrix7d::Zero();
  t.topLeftCorner<6, 6>() = theta1;
  t.topRightCorner<6, 1>() = theta2;
  t.bottomLeftCorner<1, 6>() = theta2.transpose();
  t(6, 6) = theta3;
  return t;
}

LiftedData build_fqr(const model::AugmentedSystem& sys) {
  LiftedData out;
  out.F.topLeftCorner<6, 6>() = sys.A;
  out.F.topRightCorner<6, 1>() = -sys.B2;
  out.G(6) = 1.0;
  out.Q.topLeftCorner<6, 6>() = sys.B1 * sys.B1.transpose();
  out.R.topLeftCorner<6, 6>() = sys.C.transpose() * sys.C;
  out.R(6, 6) = sys.D.squaredNorm();
  out.Rhalf = linalg::psd_sqrt(out.R);
  return out;
}

ThetaBlocks theta(const Certificate& cert, const LiftedData& lifted) {
  const Matrix7d w = cert.W();
  const Matrix7d full = lifted.F * w + w * lifted.F.transpose() +
                        w * lifted.R * w + cert.mu * lifted.Q;
  ThetaBlocks out;
  out.theta1 = full.topLeftCorner<6, 6>();
  out.theta2 = full.topRightCorner<6, 1>();
  out.theta3 = full(6, 6);
  return out;
}

Eigen::Matrix<double, 3, 4> sparsity_residual(const Certificate& cert) {
  Eigen::Matrix<double, 3, 4> res;
  res.leftCols<3>() = cert.W1.topRightCorner<3, 3>();
  res.col(3) = cert.W2.head<3>();
  return res;
}

GainVector extract_gain(const Certificate& cert) {
  GainVector out;
  if (sparsity_residual(cert).isZero(0.0)) {
    // Structured certificate: W1 is block diagonal, so k = W2^T W1^{-1}
    // reduces to a 3x3 solve on the error block and exact zeros elsewhere.
    const Eigen::Matrix3d w1e = cert.W1.bottomRightCorner<3, 3>();
    Eigen::LLT<Eigen::Matrix3d> llt(w1e);
    if (llt.info() != Eigen::Success ||
        Eigen::LLT<Eigen::Matrix3d>(cert.W1.topLeftCorner<3, 3>()).info() !=
            Eigen::Success) {
      throw std::invalid_argument(
          "extract_gain: W1 must be positive definite");
    }
    out.k.tail<3>() = llt.solve(cert.W2.tail<3>()).transpose();
    return out;
  }
  Eigen::LLT<Matrix6d> llt(cert.W1);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("extract_gain: W1 must be positive definite");
  }
  out.k = llt.solve(cert.W2).transpose();
  return out;
}

PidGains to_pid(const GainVector& gain) {
  if (!gain.k.head<3>().isZero(0.0)) {
    throw std::invalid_argument(
        "to_pid: gain acts on reference states; no PID realization exists");
  }
  return PidGains{-gain.k(4), -gain.k(3), -gain.k(5)};
}

Matrix13d schur_lmi(const Certificate& cert, const LiftedData& lifted) {
  const Matrix7d w = cert.W();
  const Matrix7d fw = lifted.F * w;  // (F W)^T = W F^T since W is symmetric
  const Matrix7d wr = w * lifted.Rhalf;

  Matrix13d out = Matrix13d::Zero();
  out.topLeftCorner<6, 6>() =
      -fw.topLeftCorner<6, 6>() - fw.topLeftCorner<6, 6>().transpose() -
      cert.mu * lifted.Q.topLeftCorner<6, 6>();
  out.topRightCorner<6, 7>() = wr.topRows<6>();
  out.bottomLeftCorner<7, 6>() = wr.topRows<6>().transpose();
  out.bottomRightCorner<7, 7>() = Matrix7d::Identity();
  return out;
}

}  // namespace pidsyn::lmi
