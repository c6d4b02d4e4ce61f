#pragma once

#include <Eigen/Dense>

namespace rkhm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenpairs of a real symmetric matrix.
///
/// Eigenvalues are sorted descending. Each eigenvector column is sign-fixed so
/// that its first component with magnitude above 1e-14 is positive, which makes
/// subgradient choices (top / bottom eigenvector) reproducible across runs.
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;

  Matrix reconstruct() const;
};

/// Cyclic Jacobi rotations. Input is symmetrized as (a + a^T) / 2.
SpectralDecomposition jacobi_eigen(const Matrix& a);

/// Dispatches to jacobi_eigen for small matrices (n <= kJacobiMaxDim) and to
/// Householder tridiagonalization + implicit QR above that. Both paths apply
/// the same ordering and sign convention.
SpectralDecomposition symmetric_eigen(const Matrix& a);

inline constexpr Eigen::Index kJacobiMaxDim = 64;

}  // namespace rkhm
