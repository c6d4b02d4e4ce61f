#pragma once

#include <cstdint>
#include <vector>

#include "rkhm/kernels.hpp"

namespace rkhm {

/// One RKHM layer in representer form: f(x) = sum_i k(x, z_i) c_i, where the
/// anchors z_i are supplied by the enclosing model.
struct Layer {
  MatrixKernel kernel;
  AlgebraDescriptor coeff_desc;
  std::vector<AlgebraElement> coeffs;
};

/// Layer data that does not depend on the query point. Every layer is written
/// as f(x) = left(x) * sum_l s(phi(x), phi(z_l)) v_l with
///   separable:    phi(z) = z,    v_l = c_l,       left(x) = a
///   product-conv: phi(z) = z a,  v_l = z_l^T c_l, left(x) = x
struct PreparedLayer {
  explicit PreparedLayer(MatrixKernel k) : kernel(std::move(k)) {}

  MatrixKernel kernel;
  std::vector<Matrix> mapped_anchors;
  std::vector<Matrix> values;
  Matrix factor;  // dense a

  /// Kernel weights s(phi(x), phi(z_l)) for all anchors.
  Vector weights(const Matrix& x) const;
  Matrix apply(const Matrix& x) const;
};

PreparedLayer prepare_layer(const Layer& layer, const std::vector<Matrix>& anchor_inputs);

/// sum_i k(x, z_i) c_i.
Matrix layer_forward(const Layer& layer, const std::vector<Matrix>& anchor_inputs, const Matrix& x);

/// Square root of || sum_{i,l} c_i^T k(z_i, z_l) c_l ||_op.
double rkhm_norm(const Layer& layer, const std::vector<Matrix>& anchor_inputs);
/// The quadratic form sum_{i,l} c_i^T k(z_i, z_l) c_l itself.
Matrix rkhm_quadratic_form(const Layer& layer, const std::vector<Matrix>& anchor_inputs);

/// Composition f_L o ... o f_1 with all layers anchored at the images of the
/// training inputs: layer j uses x_i^{j-1} = f_{j-1} o ... o f_1(x_i).
class DeepModel {
 public:
  DeepModel(std::vector<Layer> layers, std::vector<Matrix> anchors);

  std::size_t depth() const { return layers_.size(); }
  std::size_t anchor_count() const { return anchors_.size(); }
  int dim() const { return static_cast<int>(anchors_.front().rows()); }
  const std::vector<Layer>& layers() const { return layers_; }
  const Layer& layer(std::size_t j) const { return layers_.at(j); }
  const std::vector<Matrix>& anchors() const { return anchors_; }

  /// Replaces one coefficient; invalidates cached anchor images.
  void set_coeff(std::size_t layer, std::size_t i, AlgebraElement c);
  /// Applies fn to every coefficient in place; invalidates the cache.
  template <class Fn>
  void update_coeffs(Fn&& fn) {
    for (std::size_t j = 0; j < layers_.size(); ++j) {
      for (std::size_t i = 0; i < layers_[j].coeffs.size(); ++i) fn(j, i, layers_[j].coeffs[i]);
    }
    invalidate();
  }

  std::uint64_t version() const { return version_; }

  /// images()[j][i] = x_i^j for j = 0..L (j = 0 are the anchors).
  const std::vector<std::vector<Matrix>>& anchor_images() const;
  /// Prepared layers anchored at the current images.
  const std::vector<PreparedLayer>& prepared() const;

  Matrix forward(const Matrix& x) const;
  /// Recomputes every anchor image from scratch on each call.
  Matrix forward_uncached(const Matrix& x) const;

 private:
  void invalidate();
  void refresh() const;
  void validate() const;

  std::vector<Layer> layers_;
  std::vector<Matrix> anchors_;
  std::uint64_t version_ = 0;

  mutable std::uint64_t cached_version_ = ~std::uint64_t{0};
  mutable std::vector<std::vector<Matrix>> images_;
  mutable std::vector<PreparedLayer> prepared_;
};

Matrix model_forward(const DeepModel& model, const Matrix& x);

}  // namespace rkhm
