#pragma once

#include <variant>
#include <vector>

#include "rkhm/algebra.hpp"

namespace rkhm {

enum class ScalarKernelKind { Laplacian, Gaussian };

/// Translation-invariant scalar kernel on d x d matrices viewed as vectors:
/// Laplacian exp(-c sum |x_ij - y_ij|), Gaussian exp(-c sum (x_ij - y_ij)^2).
struct ScalarKernel {
  ScalarKernelKind kind = ScalarKernelKind::Laplacian;
  double c = 1e-3;
};

double scalar_eval(const ScalarKernel& k, const Matrix& x, const Matrix& y);

/// d k(x, y) / dx given the already-evaluated value k(x, y). The derivative
/// with respect to y is the negation. Laplacian uses sign(0) = 0.
Matrix scalar_grad_x(const ScalarKernel& k, const Matrix& x, const Matrix& y, double value);

/// grad_x += coef * d k(x, y) / dx and grad_y -= the same, without
/// allocating. value must be k(x, y).
void scalar_grad_accumulate(const ScalarKernel& k, const Matrix& x, const Matrix& y, double value,
                            double coef, Matrix& grad_x, Matrix& grad_y);

/// k(x, y) = scalar(x, y) * a with a symmetric positive definite.
struct SeparableKernel {
  ScalarKernel scalar;
  AlgebraElement a;
};

/// k(x, y) = scalar(x a, y a) * x y^T. Values are Full d x d.
struct ProductConvKernel {
  ScalarKernel scalar;
  AlgebraElement a;
};

class MatrixKernel {
 public:
  /// Checks a is symmetric PSD and invertible (smallest eigenvalue above
  /// 1e-12 times the largest).
  static MatrixKernel separable(ScalarKernel scalar, AlgebraElement a);
  static MatrixKernel product_conv(ScalarKernel scalar, AlgebraElement a);

  bool is_separable() const { return std::holds_alternative<SeparableKernel>(variant_); }
  const SeparableKernel& as_separable() const { return std::get<SeparableKernel>(variant_); }
  const ProductConvKernel& as_product_conv() const { return std::get<ProductConvKernel>(variant_); }

  const ScalarKernel& scalar() const;
  const AlgebraElement& factor() const;
  int dim() const { return factor().dim(); }
  AlgebraDescriptor output_desc() const;

 private:
  explicit MatrixKernel(std::variant<SeparableKernel, ProductConvKernel> v) : variant_(std::move(v)) {}
  std::variant<SeparableKernel, ProductConvKernel> variant_;
};

AlgebraElement kernel_eval(const MatrixKernel& k, const Matrix& x, const Matrix& y);

/// Vector-Jacobian product of kernel_eval: given the adjoint of k(x, y),
/// accumulates adjoints into grad_x and grad_y.
void kernel_vjp(const MatrixKernel& k, const Matrix& x, const Matrix& y, const Matrix& bar_k,
                Matrix& grad_x, Matrix& grad_y);

/// n x n block Gram matrix. Separable kernels keep the factored form
/// scalar_gram (x) factor; everything else is dense dn x dn.
class GramMatrix {
 public:
  struct Factored {
    Matrix scalar_gram;
    AlgebraElement factor;
  };

  static GramMatrix dense(Matrix entries, int d);
  static GramMatrix factored(Matrix scalar_gram, AlgebraElement factor);

  int n() const { return n_; }
  int d() const { return d_; }
  bool is_factored() const { return std::holds_alternative<Factored>(storage_); }
  const Factored& as_factored() const { return std::get<Factored>(storage_); }

  /// dn x dn materialization; block (i, l) is k(x_i, x_l).
  Matrix materialize() const;
  Matrix block(int i, int l) const;

 private:
  GramMatrix(int n, int d, std::variant<Matrix, Factored> s) : n_(n), d_(d), storage_(std::move(s)) {}
  int n_;
  int d_;
  std::variant<Matrix, Factored> storage_;
};

GramMatrix gram(const MatrixKernel& k, const std::vector<Matrix>& points);
/// Always dense, assembled entrywise from kernel_eval.
GramMatrix gram_dense(const MatrixKernel& k, const std::vector<Matrix>& points);
/// n x n matrix of scalar(phi(x_i), phi(x_l)) where phi is the kernel's input map.
Matrix scalar_gram(const MatrixKernel& k, const std::vector<Matrix>& points);

double trace_sum(const MatrixKernel& k, const std::vector<Matrix>& points);

/// Input map applied before the scalar kernel: identity for separable,
/// right multiplication by a for product-convolution.
Matrix kernel_input_map(const MatrixKernel& k, const Matrix& x);

}  // namespace rkhm
