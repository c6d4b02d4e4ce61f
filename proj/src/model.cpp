#include "rkhm/model.hpp"

#include <cmath>

namespace rkhm {

Vector PreparedLayer::weights(const Matrix& x) const {
  const Matrix phi = kernel_input_map(kernel, x);
  Vector w(static_cast<Eigen::Index>(mapped_anchors.size()));
  for (std::size_t l = 0; l < mapped_anchors.size(); ++l) {
    w(static_cast<Eigen::Index>(l)) = scalar_eval(kernel.scalar(), phi, mapped_anchors[l]);
  }
  return w;
}

Matrix PreparedLayer::apply(const Matrix& x) const {
  if (x.rows() != factor.rows() || x.cols() != factor.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "layer input does not match layer dimension");
  }
  const Vector w = weights(x);
  Matrix sum = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t l = 0; l < values.size(); ++l) sum += w(static_cast<Eigen::Index>(l)) * values[l];
  if (kernel.is_separable()) return factor * sum;
  return x * sum;
}

PreparedLayer prepare_layer(const Layer& layer, const std::vector<Matrix>& anchor_inputs) {
  if (anchor_inputs.size() != layer.coeffs.size()) {
    throw Error(ErrorCode::ShapeMismatch, "anchor count differs from coefficient count");
  }
  PreparedLayer p(layer.kernel);
  p.factor = layer.kernel.factor().dense();
  p.mapped_anchors.reserve(anchor_inputs.size());
  p.values.reserve(anchor_inputs.size());
  const bool separable = layer.kernel.is_separable();
  for (std::size_t l = 0; l < anchor_inputs.size(); ++l) {
    p.mapped_anchors.push_back(kernel_input_map(layer.kernel, anchor_inputs[l]));
    const Matrix c = layer.coeffs[l].dense();
    p.values.push_back(separable ? c : Matrix(anchor_inputs[l].transpose() * c));
  }
  return p;
}

Matrix layer_forward(const Layer& layer, const std::vector<Matrix>& anchor_inputs, const Matrix& x) {
  return prepare_layer(layer, anchor_inputs).apply(x);
}

Matrix rkhm_quadratic_form(const Layer& layer, const std::vector<Matrix>& anchor_inputs) {
  // sum_l k(z_i, z_l) c_l is the layer output at z_i.
  const PreparedLayer p = prepare_layer(layer, anchor_inputs);
  const int d = layer.kernel.dim();
  Matrix q = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < anchor_inputs.size(); ++i) {
    q += layer.coeffs[i].dense().transpose() * p.apply(anchor_inputs[i]);
  }
  return q;
}

double rkhm_norm(const Layer& layer, const std::vector<Matrix>& anchor_inputs) {
  const Matrix q = rkhm_quadratic_form(layer, anchor_inputs);
  const double top = symmetric_eigen(q).eigenvalues(0);
  return std::sqrt(std::max(top, 0.0));
}

// --- DeepModel --------------------------------------------------------------

DeepModel::DeepModel(std::vector<Layer> layers, std::vector<Matrix> anchors)
    : layers_(std::move(layers)), anchors_(std::move(anchors)) {
  validate();
}

void DeepModel::validate() const {
  if (layers_.empty()) throw Error(ErrorCode::InvalidInput, "model needs at least one layer");
  if (anchors_.empty()) throw Error(ErrorCode::InvalidInput, "model needs at least one anchor");
  const int d = static_cast<int>(anchors_.front().rows());
  for (const auto& z : anchors_) {
    if (z.rows() != d || z.cols() != d) throw Error(ErrorCode::ShapeMismatch, "anchors must be d x d");
  }
  for (const auto& layer : layers_) {
    if (layer.kernel.dim() != d || layer.coeff_desc.dim() != d) {
      throw Error(ErrorCode::ShapeMismatch, "layer dimension differs from anchor dimension");
    }
    if (layer.coeffs.size() != anchors_.size()) {
      throw Error(ErrorCode::ShapeMismatch, "every layer needs one coefficient per anchor");
    }
    for (const auto& c : layer.coeffs) {
      if (!(c.desc() == layer.coeff_desc)) {
        throw Error(ErrorCode::DescriptorMismatch, "coefficient does not match layer subalgebra");
      }
    }
  }
}

void DeepModel::set_coeff(std::size_t layer, std::size_t i, AlgebraElement c) {
  auto& slot = layers_.at(layer).coeffs.at(i);
  if (!(c.desc() == slot.desc())) {
    throw Error(ErrorCode::DescriptorMismatch, "coefficient does not match layer subalgebra");
  }
  slot = std::move(c);
  invalidate();
}

void DeepModel::invalidate() { ++version_; }

void DeepModel::refresh() const {
  if (cached_version_ == version_) return;
  images_.assign(1, anchors_);
  prepared_.clear();
  prepared_.reserve(layers_.size());
  for (const auto& layer : layers_) {
    const auto& inputs = images_.back();
    prepared_.push_back(prepare_layer(layer, inputs));
    std::vector<Matrix> next;
    next.reserve(inputs.size());
    for (const auto& z : inputs) next.push_back(prepared_.back().apply(z));
    images_.push_back(std::move(next));
  }
  cached_version_ = version_;
}

const std::vector<std::vector<Matrix>>& DeepModel::anchor_images() const {
  refresh();
  return images_;
}

const std::vector<PreparedLayer>& DeepModel::prepared() const {
  refresh();
  return prepared_;
}

Matrix DeepModel::forward(const Matrix& x) const {
  refresh();
  Matrix h = x;
  for (const auto& p : prepared_) h = p.apply(h);
  return h;
}

Matrix DeepModel::forward_uncached(const Matrix& x) const {
  std::vector<Matrix> inputs = anchors_;
  Matrix h = x;
  for (const auto& layer : layers_) {
    std::vector<Matrix> next;
    next.reserve(inputs.size());
    for (const auto& z : inputs) next.push_back(layer_forward(layer, inputs, z));
    h = layer_forward(layer, inputs, h);
    inputs = std::move(next);
  }
  return h;
}

Matrix model_forward(const DeepModel& model, const Matrix& x) { return model.forward(x); }

}  // namespace rkhm
