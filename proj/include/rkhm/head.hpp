#pragma once

// Two dense layers on top of a flattened model output:
// probs = softmax(W2 sigmoid(W1 x + b1) + b2).

#include <random>

#include "rkhm/algebra.hpp"

namespace rkhm {

struct DenseHead {
  Matrix W1;
  Vector b1;
  Matrix W2;
  Vector b2;

  static DenseHead zeros(int input, int hidden, int classes);
  /// Glorot-uniform weights, zero biases.
  static DenseHead glorot(int input, int hidden, int classes, std::mt19937_64& rng);

  int input_size() const { return static_cast<int>(W1.cols()); }
  int hidden_size() const { return static_cast<int>(W1.rows()); }
  int classes() const { return static_cast<int>(W2.rows()); }

  /// W1, b1, W2, b2 concatenated, matrices row-major.
  Vector params() const;
  void set_params(const Vector& p);
};

Vector flatten_row_major(const Matrix& m);

Vector softmax(const Vector& logits);

Vector dense_head_logits(const DenseHead& head, const Vector& x);
Vector dense_head_forward(const DenseHead& head, const Vector& x);

struct HeadGradient {
  DenseHead grad;        // same shapes as the head
  Vector input_adjoint;  // d loss / d x
};

/// Reverse pass given d loss / d logits.
HeadGradient dense_head_backward(const DenseHead& head, const Vector& x, const Vector& logit_adjoint);

}  // namespace rkhm
