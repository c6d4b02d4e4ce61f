#pragma once

// Objectives for deep RKHMs and their reverse-mode gradients with respect to
// every representer coefficient. Gradients flow through kernel evaluations,
// the anchor images of earlier layers, eigenvalue-based operator norms and the
// Perron-Frobenius regularizer. Ties in top eigenvalues take the first
// eigenvector under the spectral module's sign convention.

#include <cstddef>
#include <vector>

#include "rkhm/model.hpp"

namespace rkhm {

enum class LossKind { OpNorm, HsMean, CrossEntropy };

struct LossConfig {
  LossKind kind = LossKind::OpNorm;
  double lambda1 = 0.0;  // Perron-Frobenius regularizer weight
  double eta = 0.01;     // ridge inside ||(eta I + G_L)^{-1}||
  double lambda2 = 0.0;  // weight on the last layer's RKHM norm
  bool squared_norm = true;  // penalize ||f_L||^2 instead of ||f_L||

  void validate() const;
};

// --- losses -----------------------------------------------------------------

/// Value and adjoint with respect to each prediction.
struct LossValue {
  double value = 0.0;
  std::vector<Matrix> adjoints;
};

/// || (1/n) sum_i (p_i - y_i)^T (p_i - y_i) ||_op.
double loss_opnorm(const std::vector<Matrix>& preds, const std::vector<Matrix>& targets);
LossValue loss_opnorm_grad(const std::vector<Matrix>& preds, const std::vector<Matrix>& targets);

/// (1/n) sum_i || p_i - y_i ||_HS^2.
double loss_hs(const std::vector<Matrix>& preds, const std::vector<Matrix>& targets);
LossValue loss_hs_grad(const std::vector<Matrix>& preds, const std::vector<Matrix>& targets);

/// Mean of -log softmax(logits)[label], computed with log-sum-exp.
double loss_cross_entropy(const std::vector<Vector>& logits, const std::vector<int>& labels);
struct CrossEntropyValue {
  double value = 0.0;
  std::vector<Vector> adjoints;  // d loss / d logits
};
CrossEntropyValue loss_cross_entropy_grad(const std::vector<Vector>& logits,
                                          const std::vector<int>& labels);

// --- gradients ----------------------------------------------------------------

/// One projected gradient per coefficient, shaped like the model's layers.
struct GradientSet {
  std::vector<std::vector<AlgebraElement>> layers;

  double norm() const;
};

struct ObjectiveTerms {
  double data = 0.0;
  double reg_pf = 0.0;
  double reg_norm = 0.0;

  double total() const { return data + reg_pf + reg_norm; }
};

struct ObjectiveGradient {
  ObjectiveTerms terms;
  GradientSet grads;
};

/// Model outputs on a batch; returns the cached anchor images when the batch
/// is exactly the anchor set.
std::vector<Matrix> batch_forward(const DeepModel& model, const std::vector<Matrix>& inputs);

/// Regularizer values only.
ObjectiveTerms regularizer_terms(const DeepModel& model, const LossConfig& cfg);

/// Objective value for regression losses (OpNorm, HsMean).
ObjectiveTerms objective(const DeepModel& model, const std::vector<Matrix>& inputs,
                         const std::vector<Matrix>& targets, const LossConfig& cfg);

/// Reverse pass given the data-loss value and its adjoint with respect to the
/// model outputs on `inputs`. Adds both regularizers. Used directly when a
/// classification head sits on top of the model.
ObjectiveGradient backprop(const DeepModel& model, const std::vector<Matrix>& inputs,
                           double data_loss, const std::vector<Matrix>& output_adjoints,
                           const LossConfig& cfg);

ObjectiveGradient objective_grad(const DeepModel& model, const std::vector<Matrix>& inputs,
                                 const std::vector<Matrix>& targets, const LossConfig& cfg);

GradientSet grad_params(const DeepModel& model, const std::vector<Matrix>& inputs,
                        const std::vector<Matrix>& targets, const LossConfig& cfg);

// --- optimizers ---------------------------------------------------------------

enum class OptimizerKind { SGD, Adam };

/// Elementwise Adam update on a flat parameter vector. step is the 1-based
/// step count used for bias correction.
void adam_update(Vector& param, const Vector& grad, Vector& m, Vector& v, long step, double lr,
                 double beta1, double beta2, double eps);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::SGD;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step_count = 0;
  // Adam moment buffers, one flat parameter vector per coefficient.
  std::vector<std::vector<Vector>> m;
  std::vector<std::vector<Vector>> v;

  static OptimizerState sgd(double lr);
  static OptimizerState adam(double lr);
};

void optimizer_step(OptimizerState& state, DeepModel& model, const GradientSet& grads);

// --- finite differences -------------------------------------------------------

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;

  double skipped_fraction() const {
    const std::size_t total = checked + skipped;
    return total == 0 ? 0.0 : static_cast<double>(skipped) / static_cast<double>(total);
  }
};

/// Central differences along every basis direction of every coefficient's
/// subalgebra. Entries whose perturbation crosses a Laplacian kink are
/// skipped, and so is everything when an operator-norm eigenvalue gap is
/// below 1e-10. The relative error of an entry is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-3 * max |analytic|).
FiniteDiffReport finite_diff_check(const DeepModel& model, const std::vector<Matrix>& inputs,
                                   const std::vector<Matrix>& targets, const LossConfig& cfg,
                                   double step);

}  // namespace rkhm
