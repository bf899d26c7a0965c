#pragma once

#include <Eigen/Dense>

namespace pidsyn {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix7d = Eigen::Matrix<double, 7, 7>;
using Vector7d = Eigen::Matrix<double, 7, 1>;
using Matrix46d = Eigen::Matrix<double, 4, 6>;
using Vector4d = Eigen::Matrix<double, 4, 1>;
using Vector8d = Eigen::Matrix<double, 8, 1>;
using Matrix68d = Eigen::Matrix<double, 6, 8>;
using RowVector6d = Eigen::Matrix<double, 1, 6>;
using Matrix13d = Eigen::Matrix<double, 13, 13>;

namespace linalg {

// Matrix exponential by scaling-and-squaring with a degree-13 Pade
// approximant (Higham 2005).  Adequate for the small dense matrices
// used throughout (reference generators, lifted system blocks).
[[nodiscard]] Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

// Symmetric square root of a (nearly) PSD matrix: eigendecompose,
// clamp negative eigenvalues to zero, recompose.  Input is symmetrized
// before decomposition so callers may pass mildly asymmetric data.
[[nodiscard]] Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a);

// Extreme eigenvalues of a symmetric matrix (input symmetrized first).
[[nodiscard]] double eig_max_sym(const Eigen::MatrixXd& a);
[[nodiscard]] double eig_min_sym(const Eigen::MatrixXd& a);

// Spectral norm (largest singular value) of a symmetric matrix.
[[nodiscard]] double spectral_norm_sym(const Eigen::MatrixXd& a);

// Largest real part over the eigenvalues of a general square matrix.
[[nodiscard]] double spectral_abscissa(const Eigen::MatrixXd& a);

// Parlett-Reinsch balancing: diagonal similarity D^-1 A D with powers-of-two
// scales equalizing row/column norms.  Exact in floating point; improves
// eigenvalue accuracy for badly scaled matrices (e.g. Hamiltonians whose
// blocks span many orders of magnitude).
[[nodiscard]] Eigen::MatrixXd balance(const Eigen::MatrixXd& a);

}  // namespace linalg
}  // namespace pidsyn
