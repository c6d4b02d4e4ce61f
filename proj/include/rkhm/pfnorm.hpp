#pragma once

// Norm of the composed Perron-Frobenius operator restricted to the submodule
// spanned by the training features, computed from Gram data only.

#include <optional>
#include <utility>

#include "rkhm/kernels.hpp"

namespace rkhm {

struct PfReport {
  std::optional<double> exact;
  double bound = 0.0;
  double regularizer = 0.0;
  std::pair<double, double> eigen_extrema{0.0, 0.0};  // (min, max) of G_L
};

/// (smallest, largest) eigenvalue of a Gram matrix. Factored Grams combine the
/// extrema of the scalar Gram and of the factor.
std::pair<double, double> gram_eigen_extrema(const GramMatrix& g);

/// || G_L^{1/2} G_1^{-1/2} ||_op. The QR normalizer R_j with R_j^T G_j R_j = I
/// is unique up to an orthogonal factor, so R_j = G_j^{-1/2} gives the same
/// operator norm.
double pf_norm_exact(const GramMatrix& g1, const GramMatrix& gl);

/// ||G_L^{-1}||^{1/2} ||G_L|| ||G_1^{-1}||^{1/2}.
double pf_norm_bound(const GramMatrix& g1, const GramMatrix& gl);

/// lambda1 * (||(eta I + G_L)^{-1}|| + ||G_L||).
double pf_regularizer(const GramMatrix& gl, double eta, double lambda1);

/// Value and gradient of pf_regularizer with respect to the stored Gram data:
/// for a dense Gram the dn x dn adjoint, for a factored Gram the n x n adjoint
/// of the scalar Gram (the factor is fixed).
struct RegularizerGradient {
  double value = 0.0;
  Matrix adjoint;
};
RegularizerGradient pf_regularizer_grad(const GramMatrix& gl, double eta, double lambda1);

/// Dense grams above this size skip the exact value in pf_report.
inline constexpr Eigen::Index kExactPfMaxDim = 4096;

PfReport pf_report(const GramMatrix& g1, const GramMatrix& gl, double eta, double lambda1);

}  // namespace rkhm
