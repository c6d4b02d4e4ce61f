#include "rkhm/pfnorm.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rkhm {

namespace {

struct Extremes {
  double min;
  double max;
  Vector min_vec;
  Vector max_vec;
};

Extremes extremes_of(const Matrix& sym) {
  const SpectralDecomposition sd = symmetric_eigen(sym);
  const Eigen::Index last = sd.eigenvalues.size() - 1;
  return {sd.eigenvalues(last), sd.eigenvalues(0), sd.eigenvectors.col(last), sd.eigenvectors.col(0)};
}

void require_invertible(double lo, double hi, const char* which) {
  if (!(hi > 0.0) || !(lo > kSingularityThreshold * hi)) {
    throw Error(ErrorCode::SingularGram, std::string(which) + " smallest eigenvalue " +
                                             std::to_string(lo) + " is below threshold");
  }
}

/// sqrt(lambda_max(B^{-1/2} A B^{-1/2})) = || A^{1/2} B^{-1/2} ||_op.
double ratio_norm(const Matrix& a, const Matrix& b) {
  const SpectralDecomposition sb = symmetric_eigen(b);
  const Eigen::Index n = sb.eigenvalues.size();
  require_invertible(sb.eigenvalues(n - 1), sb.eigenvalues(0), "G_1");
  const Matrix b_inv_sqrt =
      sb.eigenvectors * sb.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * sb.eigenvectors.transpose();
  const Matrix m = b_inv_sqrt * a * b_inv_sqrt;
  return std::sqrt(std::max(symmetric_eigen(m).eigenvalues(0), 0.0));
}

void require_compatible(const GramMatrix& g1, const GramMatrix& gl) {
  if (g1.n() != gl.n() || g1.d() != gl.d()) {
    throw Error(ErrorCode::ShapeMismatch, "Gram matrices differ in size");
  }
}

}  // namespace

std::pair<double, double> gram_eigen_extrema(const GramMatrix& g) {
  if (g.is_factored()) {
    const auto& f = g.as_factored();
    const Extremes s = extremes_of(f.scalar_gram);
    const Extremes a = extremes_of(f.factor.dense());
    // Both factors are PSD, so extremal products pair min with min.
    return {s.min * a.min, s.max * a.max};
  }
  const Extremes e = extremes_of(g.materialize());
  return {e.min, e.max};
}

double pf_norm_exact(const GramMatrix& g1, const GramMatrix& gl) {
  require_compatible(g1, gl);
  const auto [lo, hi] = gram_eigen_extrema(gl);
  require_invertible(lo, hi, "G_L");
  if (g1.is_factored() && gl.is_factored()) {
    const auto& f1 = g1.as_factored();
    const auto& fl = gl.as_factored();
    const double scalar_part = ratio_norm(fl.scalar_gram, f1.scalar_gram);
    const double factor_part =
        f1.factor.dense() == fl.factor.dense() ? 1.0 : ratio_norm(fl.factor.dense(), f1.factor.dense());
    return scalar_part * factor_part;
  }
  return ratio_norm(gl.materialize(), g1.materialize());
}

double pf_norm_bound(const GramMatrix& g1, const GramMatrix& gl) {
  require_compatible(g1, gl);
  const auto [l_lo, l_hi] = gram_eigen_extrema(gl);
  const auto [f_lo, f_hi] = gram_eigen_extrema(g1);
  require_invertible(l_lo, l_hi, "G_L");
  require_invertible(f_lo, f_hi, "G_1");
  return std::sqrt(1.0 / l_lo) * l_hi * std::sqrt(1.0 / f_lo);
}

double pf_regularizer(const GramMatrix& gl, double eta, double lambda1) {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidInput, "eta must be positive");
  if (lambda1 < 0.0) throw Error(ErrorCode::InvalidInput, "lambda1 must be nonnegative");
  if (lambda1 == 0.0) return 0.0;
  const auto [lo, hi] = gram_eigen_extrema(gl);
  if (!(eta + lo > 0.0)) throw Error(ErrorCode::NonFinite, "eta I + G_L is not positive definite");
  return lambda1 * (1.0 / (eta + lo) + hi);
}

RegularizerGradient pf_regularizer_grad(const GramMatrix& gl, double eta, double lambda1) {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidInput, "eta must be positive");
  RegularizerGradient out;
  if (gl.is_factored()) {
    const auto& f = gl.as_factored();
    const Extremes s = extremes_of(f.scalar_gram);
    const Extremes a = extremes_of(f.factor.dense());
    const double shifted = eta + s.min * a.min;
    if (!(shifted > 0.0)) throw Error(ErrorCode::NonFinite, "eta I + G_L is not positive definite");
    out.value = lambda1 * (1.0 / shifted + s.max * a.max);
    out.adjoint = lambda1 * (a.max * s.max_vec * s.max_vec.transpose() -
                             (a.min / (shifted * shifted)) * s.min_vec * s.min_vec.transpose());
    return out;
  }
  const Extremes e = extremes_of(gl.materialize());
  const double shifted = eta + e.min;
  if (!(shifted > 0.0)) throw Error(ErrorCode::NonFinite, "eta I + G_L is not positive definite");
  out.value = lambda1 * (1.0 / shifted + e.max);
  out.adjoint = lambda1 * (e.max_vec * e.max_vec.transpose() -
                           (1.0 / (shifted * shifted)) * e.min_vec * e.min_vec.transpose());
  return out;
}

PfReport pf_report(const GramMatrix& g1, const GramMatrix& gl, double eta, double lambda1) {
  PfReport r;
  r.eigen_extrema = gram_eigen_extrema(gl);
  r.bound = pf_norm_bound(g1, gl);
  const bool small = (gl.is_factored() && g1.is_factored()) ||
                     static_cast<Eigen::Index>(gl.n()) * gl.d() <= kExactPfMaxDim;
  if (small) r.exact = pf_norm_exact(g1, gl);
  r.regularizer = pf_regularizer(gl, eta, lambda1);
  return r;
}

}  // namespace rkhm
