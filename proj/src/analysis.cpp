#include "pidsyn/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace pidsyn::analysis {

namespace {

using Matrix6cd = Eigen::Matrix<std::complex<double>, 6, 6>;
using Matrix46cd = Eigen::Matrix<std::complex<double>, 4, 6>;

// Largest singular value of G(jw) = Ccl (jwI - Acl)^-1 B1.
double sigma_max(const ClosedLoop& cl, double omega) {
  Matrix6cd m = (-cl.acl).cast<std::complex<double>>();
  for (int i = 0; i < 6; ++i) m(i, i) += std::complex<double>(0.0, omega);
  const Matrix6cd x = m.partialPivLu().solve(cl.b1.cast<std::complex<double>>());
  const Matrix46cd g = cl.ccl.cast<std::complex<double>>() * x;
  Eigen::JacobiSVD<Matrix46cd> svd(g);
  return svd.singularValues()(0);
}

// Golden-section maximization of f on [a, b]; returns the best value seen.
template <class F>
double golden_max(F f, double a, double b) {
  constexpr double kPhi = 0.61803398874989484820;
  double x1 = b - kPhi * (b - a);
  double x2 = a + kPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < 90; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kPhi * (b - a);
      f1 = f(x1);
    }
  }
  return std::max(f1, f2);
}

// Dense log-frequency sweep over [1e-3, 1e6] plus the DC point, refined by
// golden-section search around the winning bracket.
double hinf_grid(const ClosedLoop& cl) {
  constexpr int kPoints = 400;
  constexpr double kLogLo = -3.0;
  constexpr double kLogHi = 6.0;
  std::vector<double> omegas(kPoints + 1);
  std::vector<double> vals(kPoints + 1);
  omegas[0] = 0.0;
  vals[0] = sigma_max(cl, 0.0);
  int best = 0;
  for (int i = 0; i < kPoints; ++i) {
    const double lg = kLogLo + (kLogHi - kLogLo) * i / (kPoints - 1);
    omegas[i + 1] = std::pow(10.0, lg);
    vals[i + 1] = sigma_max(cl, omegas[i + 1]);
    if (vals[i + 1] > vals[best]) best = i + 1;
  }
  const auto lin = [&](double w) { return sigma_max(cl, w); };
  const auto logf = [&](double u) { return sigma_max(cl, std::exp(u)); };
  double refined;
  if (best <= 1) {
    // Peak at or next to DC: refine on a linear bracket touching zero.
    refined = golden_max(lin, 0.0, omegas[std::min(best + 1, kPoints)]);
  } else if (best == kPoints) {
    refined = golden_max(logf, std::log(omegas[best - 1]), std::log(omegas[best]));
  } else {
    refined = golden_max(logf, std::log(omegas[best - 1]), std::log(omegas[best + 1]));
  }
  return std::max(vals[best], refined);
}

// True when the (balanced) matrix has an eigenvalue within 1e-8 * scale of
// the imaginary axis.
bool has_imaginary_eig(const Eigen::MatrixXd& h) {
  const Eigen::MatrixXd hb = linalg::balance(h);
  const double scale = hb.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return false;
  Eigen::EigenSolver<Eigen::MatrixXd> es(hb, false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("hinf_norm: Hamiltonian eigensolver failed");
  }
  const double thresh = 1e-8 * scale;
  for (int i = 0; i < hb.rows(); ++i) {
    if (std::abs(es.eigenvalues()(i).real()) <= thresh) return true;
  }
  return false;
}

// Bisection on gamma: for a Hurwitz strictly proper loop, |G|_inf >= gamma
// iff the Hamiltonian has an imaginary-axis eigenvalue.
double hinf_hamiltonian(const ClosedLoop& cl, double reltol) {
  const Eigen::MatrixXd btb = cl.b1 * cl.b1.transpose();
  const Eigen::MatrixXd ctc = cl.ccl.transpose() * cl.ccl;
  const auto above_norm = [&](double g) {
    Eigen::MatrixXd h(12, 12);
    h.topLeftCorner<6, 6>() = cl.acl;
    h.topRightCorner<6, 6>() = btb / g;
    h.bottomLeftCorner<6, 6>() = -ctc / g;
    h.bottomRightCorner<6, 6>() = -cl.acl.transpose();
    return !has_imaginary_eig(h);
  };
  double lo = sigma_max(cl, 0.0);  // valid lower bound on the norm
  double hi = 2.0 * std::max(lo, 1e-6);
  for (int guard = 0; !above_norm(hi); ++guard) {
    if (guard > 80) {
      throw std::runtime_error("hinf_norm: no finite upper bound found");
    }
    hi *= 2.0;
  }
  while (hi - lo > reltol * hi) {
    const double mid = 0.5 * (lo + hi);
    (above_norm(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ClosedLoop closed_loop(const model::AugmentedSystem& aug,
                       const lmi::GainVector& gain) {
  ClosedLoop cl;
  cl.acl = aug.A - aug.B2 * gain.k;
  cl.b1 = aug.B1;
  cl.ccl = aug.C - aug.D * gain.k;
  return cl;
}

double spectral_abscissa(const ClosedLoop& cl) {
  return linalg::spectral_abscissa(cl.acl);
}

HinfDetail hinf_detail(const ClosedLoop& cl, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("hinf_norm: tol must be positive");
  }
  if (linalg::spectral_abscissa(cl.acl) >= 0.0) {
    throw std::invalid_argument("hinf_norm: closed loop is not Hurwitz");
  }
  HinfDetail d;
  d.grid = hinf_grid(cl);
  d.hamiltonian = hinf_hamiltonian(cl, std::min(1e-8, 0.01 * tol));
  d.value = std::max(d.grid, d.hamiltonian);
  if (std::abs(d.grid - d.hamiltonian) >
      10.0 * tol * std::max(d.value, 1e-300)) {
    std::ostringstream msg;
    msg << "hinf_norm: methods disagree (sweep " << d.grid << ", Hamiltonian "
        << d.hamiltonian << ")";
    throw std::runtime_error(msg.str());
  }
  return d;
}

double hinf_norm(const ClosedLoop& cl, double tol) {
  return hinf_detail(cl, tol).value;
}

double riccati_residual(const model::AugmentedSystem& aug,
                        const lmi::GainVector& gain, const Matrix6d& p,
                        double gamma) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("riccati_residual: gamma must be positive");
  }
  const Matrix6d acl = aug.A - aug.B2 * gain.k;
  const Matrix46d ccl = aug.C - aug.D * gain.k;
  Matrix6d m = acl.transpose() * p + p * acl +
               (p * aug.B1) * (aug.B1.transpose() * p) / (gamma * gamma) +
               ccl.transpose() * ccl;
  m = 0.5 * (m + m.transpose()).eval();
  return linalg::eig_max_sym(m);
}

CertificateReport validate_certificate(
    const lmi::Certificate& cert,
    const std::vector<model::AugmentedSystem>& vertices, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("validate_certificate: tol must be positive");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CertificateReport rep;
  const Matrix7d w = cert.W();
  const double wnorm = linalg::spectral_norm_sym(w);
  rep.w_min_eig = linalg::eig_min_sym(w);
  rep.psd_ok = rep.w_min_eig >= -tol * std::max(1.0, wnorm);
  rep.sparsity_max = lmi::sparsity_residual(cert).cwiseAbs().maxCoeff();
  rep.sparsity_ok = rep.sparsity_max <= tol * std::max(1.0, wnorm);
  rep.gamma = cert.mu > 0.0 ? 1.0 / std::sqrt(cert.mu) : nan;

  rep.theta_ok = true;
  for (const auto& v : vertices) {
    const lmi::LiftedData lifted = lmi::build_fqr(v);
    const lmi::ThetaBlocks th = lmi::theta(cert, lifted);
    const double lmax = linalg::eig_max_sym(th.theta1);
    const double scale =
        tol * std::max(1.0, linalg::spectral_norm_sym(th.theta1));
    rep.theta_max.push_back(lmax);
    rep.theta_scale.push_back(scale);
    rep.theta_ok = rep.theta_ok && lmax <= scale;
    rep.schur_min.push_back(linalg::eig_min_sym(lmi::schur_lmi(cert, lifted)));
  }

  try {
    rep.gain = lmi::extract_gain(cert);
    rep.gain_ok = true;
  } catch (const std::exception&) {
    rep.gain_ok = false;
  }
  for (const auto& v : vertices) {
    if (!rep.gain_ok) {
      rep.abscissa.push_back(nan);
      rep.hinf.push_back(nan);
      continue;
    }
    const ClosedLoop cl = closed_loop(v, rep.gain);
    rep.abscissa.push_back(spectral_abscissa(cl));
    double h = nan;
    try {
      h = hinf_norm(cl, 1e-5);
    } catch (const std::exception&) {
      h = nan;  // not Hurwitz or method disagreement; report stays NaN
    }
    rep.hinf.push_back(h);
  }

  rep.feasible = rep.psd_ok && rep.sparsity_ok && rep.theta_ok &&
                 rep.gain_ok && cert.mu > 0.0;
  return rep;
}

std::vector<SweepPoint> uncertainty_sweep(const model::SecondOrderPlant& nominal,
                                          const model::UncertaintyBox& box,
                                          const model::SCurveSpec& spec,
                                          const model::WeightSpec& weights,
                                          const lmi::GainVector& gain,
                                          int grid_n) {
  if (grid_n < 2) {
    throw std::invalid_argument("uncertainty_sweep: grid_n must be at least 2");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SweepPoint> out;
  out.reserve(static_cast<std::size_t>(grid_n) * grid_n);
  for (int i = 0; i < grid_n; ++i) {
    const double fm =
        box.dm_lo + (box.dm_hi - box.dm_lo) * i / (grid_n - 1);
    for (int j = 0; j < grid_n; ++j) {
      const double fd =
          box.dd_lo + (box.dd_hi - box.dd_lo) * j / (grid_n - 1);
      const model::AugmentedSystem aug = model::build_augmented(
          nominal, fm * nominal.m, fd * nominal.d, spec, weights);
      SweepPoint pt;
      pt.dm_frac = fm;
      pt.dd_frac = fd;
      const ClosedLoop cl = closed_loop(aug, gain);
      pt.abscissa = spectral_abscissa(cl);
      pt.hinf = nan;
      if (pt.abscissa < 0.0) {
        try {
          pt.hinf = hinf_norm(cl, 1e-5);
        } catch (const std::exception&) {
          pt.hinf = nan;
        }
      }
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace pidsyn::analysis
