#include "rkhm/head.hpp"

#include <cmath>

namespace rkhm {

namespace {

Vector sigmoid(const Vector& v) {
  return v.unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
}

void require_input(const DenseHead& head, const Vector& x) {
  if (x.size() != head.W1.cols()) throw Error(ErrorCode::ShapeMismatch, "head input size mismatch");
}

void append(Vector& out, Eigen::Index& at, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(at++) = m(r, c);
  }
}

void extract(const Vector& in, Eigen::Index& at, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in(at++);
  }
}

}  // namespace

DenseHead DenseHead::zeros(int input, int hidden, int classes) {
  if (input < 1 || hidden < 1 || classes < 1) throw Error(ErrorCode::InvalidInput, "head sizes must be positive");
  return DenseHead{Matrix::Zero(hidden, input), Vector::Zero(hidden), Matrix::Zero(classes, hidden),
                   Vector::Zero(classes)};
}

DenseHead DenseHead::glorot(int input, int hidden, int classes, std::mt19937_64& rng) {
  DenseHead h = zeros(input, hidden, classes);
  std::uniform_real_distribution<double> u1(-std::sqrt(6.0 / (input + hidden)), std::sqrt(6.0 / (input + hidden)));
  std::uniform_real_distribution<double> u2(-std::sqrt(6.0 / (hidden + classes)),
                                            std::sqrt(6.0 / (hidden + classes)));
  for (Eigen::Index r = 0; r < h.W1.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.W1.cols(); ++c) h.W1(r, c) = u1(rng);
  }
  for (Eigen::Index r = 0; r < h.W2.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.W2.cols(); ++c) h.W2(r, c) = u2(rng);
  }
  return h;
}

Vector DenseHead::params() const {
  Vector p(W1.size() + b1.size() + W2.size() + b2.size());
  Eigen::Index at = 0;
  append(p, at, W1);
  append(p, at, b1);
  append(p, at, W2);
  append(p, at, b2);
  return p;
}

void DenseHead::set_params(const Vector& p) {
  if (p.size() != W1.size() + b1.size() + W2.size() + b2.size()) {
    throw Error(ErrorCode::ShapeMismatch, "head parameter vector has the wrong length");
  }
  Eigen::Index at = 0;
  Matrix b1m(b1.size(), 1), b2m(b2.size(), 1);
  extract(p, at, W1);
  extract(p, at, b1m);
  extract(p, at, W2);
  extract(p, at, b2m);
  b1 = b1m;
  b2 = b2m;
}

Vector flatten_row_major(const Matrix& m) {
  Vector v(m.size());
  Eigen::Index at = 0;
  append(v, at, m);
  return v;
}

Vector softmax(const Vector& logits) {
  const double top = logits.maxCoeff();
  Vector e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

Vector dense_head_logits(const DenseHead& head, const Vector& x) {
  require_input(head, x);
  return head.W2 * sigmoid(head.W1 * x + head.b1) + head.b2;
}

Vector dense_head_forward(const DenseHead& head, const Vector& x) { return softmax(dense_head_logits(head, x)); }

HeadGradient dense_head_backward(const DenseHead& head, const Vector& x, const Vector& logit_adjoint) {
  require_input(head, x);
  if (logit_adjoint.size() != head.W2.rows()) throw Error(ErrorCode::ShapeMismatch, "logit adjoint size mismatch");
  const Vector h = sigmoid(head.W1 * x + head.b1);
  HeadGradient g{DenseHead::zeros(head.input_size(), head.hidden_size(), head.classes()), Vector()};
  g.grad.W2 = logit_adjoint * h.transpose();
  g.grad.b2 = logit_adjoint;
  const Vector bar_h = head.W2.transpose() * logit_adjoint;
  const Vector bar_pre = (bar_h.array() * h.array() * (1.0 - h.array())).matrix();
  g.grad.W1 = bar_pre * x.transpose();
  g.grad.b1 = bar_pre;
  g.input_adjoint = head.W1.transpose() * bar_pre;
  return g;
}

}  // namespace rkhm
