#include "rkhm/kernels.hpp"

#include <cmath>

#include "rkhm/parallel.hpp"

namespace rkhm {

namespace {

void require_same_shape(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "kernel arguments differ in shape");
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double scalar_eval(const ScalarKernel& k, const Matrix& x, const Matrix& y) {
  require_same_shape(x, y);
  double acc = 0.0;
  const Eigen::Index size = x.size();
  const double* px = x.data();
  const double* py = y.data();
  if (k.kind == ScalarKernelKind::Laplacian) {
    for (Eigen::Index i = 0; i < size; ++i) acc += std::abs(px[i] - py[i]);
  } else {
    for (Eigen::Index i = 0; i < size; ++i) {
      const double diff = px[i] - py[i];
      acc += diff * diff;
    }
  }
  return std::exp(-k.c * acc);
}

Matrix scalar_grad_x(const ScalarKernel& k, const Matrix& x, const Matrix& y, double value) {
  require_same_shape(x, y);
  Matrix g(x.rows(), x.cols());
  if (k.kind == ScalarKernelKind::Laplacian) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      g.data()[i] = -k.c * sign(x.data()[i] - y.data()[i]) * value;
    }
  } else {
    g = (-2.0 * k.c * value) * (x - y);
  }
  return g;
}

void scalar_grad_accumulate(const ScalarKernel& k, const Matrix& x, const Matrix& y, double value,
                            double coef, Matrix& grad_x, Matrix& grad_y) {
  const Eigen::Index size = x.size();
  const double* px = x.data();
  const double* py = y.data();
  double* gx = grad_x.data();
  double* gy = grad_y.data();
  if (k.kind == ScalarKernelKind::Laplacian) {
    const double scale = -k.c * value * coef;
    for (Eigen::Index i = 0; i < size; ++i) {
      const double g = scale * sign(px[i] - py[i]);
      gx[i] += g;
      gy[i] -= g;
    }
  } else {
    const double scale = -2.0 * k.c * value * coef;
    for (Eigen::Index i = 0; i < size; ++i) {
      const double g = scale * (px[i] - py[i]);
      gx[i] += g;
      gy[i] -= g;
    }
  }
}

// --- MatrixKernel -----------------------------------------------------------

MatrixKernel MatrixKernel::separable(ScalarKernel scalar, AlgebraElement a) {
  const Matrix m = a.dense();
  if (!is_symmetric(m)) throw Error(ErrorCode::NotSymmetric, "separable factor must be symmetric");
  const SpectralDecomposition sd = symmetric_eigen(m);
  const double top = sd.eigenvalues(0);
  const double bottom = sd.eigenvalues(sd.eigenvalues.size() - 1);
  if (!(top > 0.0) || !(bottom > kSingularityThreshold * top)) {
    throw Error(ErrorCode::SingularElement, "separable factor must be positive definite");
  }
  return MatrixKernel(SeparableKernel{scalar, std::move(a)});
}

MatrixKernel MatrixKernel::product_conv(ScalarKernel scalar, AlgebraElement a) {
  return MatrixKernel(ProductConvKernel{scalar, std::move(a)});
}

const ScalarKernel& MatrixKernel::scalar() const {
  return std::visit([](const auto& k) -> const ScalarKernel& { return k.scalar; }, variant_);
}

const AlgebraElement& MatrixKernel::factor() const {
  return std::visit([](const auto& k) -> const AlgebraElement& { return k.a; }, variant_);
}

AlgebraDescriptor MatrixKernel::output_desc() const {
  if (is_separable()) return factor().desc();
  return AlgebraDescriptor::full(dim());
}

Matrix kernel_input_map(const MatrixKernel& k, const Matrix& x) {
  if (k.is_separable()) return x;
  return x * k.factor().dense();
}

AlgebraElement kernel_eval(const MatrixKernel& k, const Matrix& x, const Matrix& y) {
  require_same_shape(x, y);
  if (x.rows() != k.dim() || x.cols() != k.dim()) {
    throw Error(ErrorCode::ShapeMismatch, "kernel input does not match kernel dimension");
  }
  if (k.is_separable()) {
    const auto& sk = k.as_separable();
    return sk.a * scalar_eval(sk.scalar, x, y);
  }
  const auto& pk = k.as_product_conv();
  const Matrix a = pk.a.dense();
  const double t = scalar_eval(pk.scalar, x * a, y * a);
  return AlgebraElement::make(AlgebraDescriptor::full(k.dim()), t * (x * y.transpose()));
}

void kernel_vjp(const MatrixKernel& k, const Matrix& x, const Matrix& y, const Matrix& bar_k,
                Matrix& grad_x, Matrix& grad_y) {
  if (k.is_separable()) {
    const auto& sk = k.as_separable();
    const double s = scalar_eval(sk.scalar, x, y);
    const double bar_s = (bar_k.array() * sk.a.dense().array()).sum();
    if (bar_s == 0.0) return;
    const Matrix g = scalar_grad_x(sk.scalar, x, y, s);
    grad_x += bar_s * g;
    grad_y -= bar_s * g;
    return;
  }
  const auto& pk = k.as_product_conv();
  const Matrix a = pk.a.dense();
  const Matrix u = x * a;
  const Matrix w = y * a;
  const double t = scalar_eval(pk.scalar, u, w);
  const double bar_t = (bar_k.array() * (x * y.transpose()).array()).sum();
  grad_x += t * (bar_k * y);
  grad_y += t * (bar_k.transpose() * x);
  if (bar_t != 0.0) {
    const Matrix gu = scalar_grad_x(pk.scalar, u, w, t) * a.transpose();
    grad_x += bar_t * gu;
    grad_y -= bar_t * gu;
  }
}

// --- Gram -------------------------------------------------------------------

GramMatrix GramMatrix::dense(Matrix entries, int d) {
  if (d <= 0 || entries.rows() != entries.cols() || entries.rows() % d != 0) {
    throw Error(ErrorCode::ShapeMismatch, "dense Gram must be dn x dn");
  }
  const int n = static_cast<int>(entries.rows() / d);
  return GramMatrix(n, d, std::move(entries));
}

GramMatrix GramMatrix::factored(Matrix scalar_gram, AlgebraElement factor) {
  if (scalar_gram.rows() != scalar_gram.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "scalar Gram must be square");
  }
  const int n = static_cast<int>(scalar_gram.rows());
  const int d = factor.dim();
  return GramMatrix(n, d, Factored{std::move(scalar_gram), std::move(factor)});
}

Matrix GramMatrix::materialize() const {
  if (const auto* m = std::get_if<Matrix>(&storage_)) return *m;
  const auto& f = std::get<Factored>(storage_);
  const Matrix a = f.factor.dense();
  Matrix out(static_cast<Eigen::Index>(n_) * d_, static_cast<Eigen::Index>(n_) * d_);
  for (int i = 0; i < n_; ++i) {
    for (int l = 0; l < n_; ++l) out.block(i * d_, l * d_, d_, d_) = f.scalar_gram(i, l) * a;
  }
  return out;
}

Matrix GramMatrix::block(int i, int l) const {
  if (const auto* m = std::get_if<Matrix>(&storage_)) return m->block(i * d_, l * d_, d_, d_);
  const auto& f = std::get<Factored>(storage_);
  return f.scalar_gram(i, l) * f.factor.dense();
}

Matrix scalar_gram(const MatrixKernel& k, const std::vector<Matrix>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  std::vector<Matrix> mapped;
  mapped.reserve(points.size());
  for (const auto& p : points) mapped.push_back(kernel_input_map(k, p));
  Matrix g(n, n);
  parallel_for(points.size(), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    g(i, i) = scalar_eval(k.scalar(), mapped[row], mapped[row]);
    for (Eigen::Index l = i + 1; l < n; ++l) {
      g(i, l) = scalar_eval(k.scalar(), mapped[row], mapped[static_cast<std::size_t>(l)]);
    }
  });
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < i; ++l) g(i, l) = g(l, i);
  }
  return g;
}

GramMatrix gram_dense(const MatrixKernel& k, const std::vector<Matrix>& points) {
  const int n = static_cast<int>(points.size());
  const int d = k.dim();
  Matrix g(static_cast<Eigen::Index>(n) * d, static_cast<Eigen::Index>(n) * d);
  parallel_for(points.size(), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int l = i; l < n; ++l) {
      g.block(i * d, l * d, d, d) = kernel_eval(k, points[row], points[static_cast<std::size_t>(l)]).dense();
    }
  });
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < i; ++l) g.block(i * d, l * d, d, d) = g.block(l * d, i * d, d, d).transpose();
  }
  return GramMatrix::dense(std::move(g), d);
}

GramMatrix gram(const MatrixKernel& k, const std::vector<Matrix>& points) {
  if (points.empty()) throw Error(ErrorCode::InvalidInput, "gram needs at least one point");
  if (k.is_separable()) return GramMatrix::factored(scalar_gram(k, points), k.factor());
  return gram_dense(k, points);
}

double trace_sum(const MatrixKernel& k, const std::vector<Matrix>& points) {
  if (points.empty()) throw Error(ErrorCode::InvalidInput, "trace_sum needs at least one point");
  double acc = 0.0;
  for (const auto& p : points) acc += trace(kernel_eval(k, p, p));
  return acc;
}

}  // namespace rkhm
