#include "rkhm/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "rkhm/pfnorm.hpp"

namespace rkhm {

void LossConfig::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0) throw Error(ErrorCode::InvalidInput, "lambdas must be nonnegative");
  if (lambda1 > 0.0 && !(eta > 0.0)) throw Error(ErrorCode::InvalidInput, "eta must be positive when lambda1 > 0");
}

// --- losses -----------------------------------------------------------------

namespace {

void check_batch(const std::vector<Matrix>& preds, const std::vector<Matrix>& targets) {
  if (preds.size() != targets.size() || preds.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and target counts differ or are empty");
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].rows() != targets[i].rows() || preds[i].cols() != targets[i].cols()) {
      throw Error(ErrorCode::ShapeMismatch, "prediction and target shapes differ");
    }
  }
}

Matrix mean_residual_gram(const std::vector<Matrix>& preds, const std::vector<Matrix>& targets) {
  Matrix m = Matrix::Zero(preds.front().cols(), preds.front().cols());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Matrix r = preds[i] - targets[i];
    m.noalias() += r.transpose() * r;
  }
  return m / static_cast<double>(preds.size());
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, what);
}

}  // namespace

double loss_opnorm(const std::vector<Matrix>& preds, const std::vector<Matrix>& targets) {
  check_batch(preds, targets);
  return std::max(symmetric_eigen(mean_residual_gram(preds, targets)).eigenvalues(0), 0.0);
}

LossValue loss_opnorm_grad(const std::vector<Matrix>& preds, const std::vector<Matrix>& targets) {
  check_batch(preds, targets);
  const SpectralDecomposition sd = symmetric_eigen(mean_residual_gram(preds, targets));
  const Vector v = sd.eigenvectors.col(0);
  const Matrix vvt = v * v.transpose();
  LossValue out;
  out.value = std::max(sd.eigenvalues(0), 0.0);
  const double scale = 2.0 / static_cast<double>(preds.size());
  out.adjoints.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out.adjoints.push_back(scale * (preds[i] - targets[i]) * vvt);
  }
  return out;
}

double loss_hs(const std::vector<Matrix>& preds, const std::vector<Matrix>& targets) {
  check_batch(preds, targets);
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) acc += (preds[i] - targets[i]).squaredNorm();
  return acc / static_cast<double>(preds.size());
}

LossValue loss_hs_grad(const std::vector<Matrix>& preds, const std::vector<Matrix>& targets) {
  LossValue out;
  out.value = loss_hs(preds, targets);
  const double scale = 2.0 / static_cast<double>(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out.adjoints.push_back(scale * (preds[i] - targets[i]));
  return out;
}

CrossEntropyValue loss_cross_entropy_grad(const std::vector<Vector>& logits,
                                          const std::vector<int>& labels) {
  if (logits.size() != labels.size() || logits.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "logit and label counts differ or are empty");
  }
  CrossEntropyValue out;
  const double inv_n = 1.0 / static_cast<double>(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const Vector& z = logits[i];
    if (labels[i] < 0 || labels[i] >= z.size()) {
      throw Error(ErrorCode::IndexOutOfRange, "label " + std::to_string(labels[i]) + " out of range");
    }
    if (!z.allFinite()) throw Error(ErrorCode::NonFinite, "non-finite logits");
    const double top = z.maxCoeff();
    const Vector shifted_exp = (z.array() - top).exp().matrix();
    const double sum = shifted_exp.sum();
    const double log_sum = top + std::log(sum);
    out.value += (log_sum - z(labels[i])) * inv_n;
    Vector g = shifted_exp / sum;
    g(labels[i]) -= 1.0;
    out.adjoints.push_back(g * inv_n);
  }
  return out;
}

double loss_cross_entropy(const std::vector<Vector>& logits, const std::vector<int>& labels) {
  return loss_cross_entropy_grad(logits, labels).value;
}

// --- gradients ----------------------------------------------------------------

double GradientSet::norm() const {
  double sq = 0.0;
  for (const auto& layer : layers) {
    for (const auto& g : layer) {
      const double h = hs_norm(g);
      sq += h * h;
    }
  }
  return std::sqrt(sq);
}

namespace {

bool same_inputs(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols() || a[i] != b[i]) return false;
  }
  return true;
}

std::vector<Matrix> zeros_like(const std::vector<Matrix>& xs) {
  std::vector<Matrix> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(Matrix::Zero(x.rows(), x.cols()));
  return out;
}

/// Adjoint of out_b = left(q_b) * sum_l s(phi(q_b), phi(z_l)) v_l with respect
/// to the queries, the anchors and the coefficients. bar_queries and
/// bar_anchors may alias.
void layer_vjp(const Layer& layer, const PreparedLayer& prep, const std::vector<Matrix>& anchors,
               const std::vector<Matrix>& queries, const std::vector<Matrix>& bar_out,
               std::vector<Matrix>& bar_queries, std::vector<Matrix>& bar_anchors,
               std::vector<Matrix>& bar_coeffs) {
  const bool separable = layer.kernel.is_separable();
  const ScalarKernel& sk = layer.kernel.scalar();
  const std::size_t n = anchors.size();
  const Eigen::Index d = prep.factor.rows();

  std::vector<Matrix> bar_values(n, Matrix::Zero(d, d));
  std::vector<Matrix> bar_phi_anchor(n, Matrix::Zero(d, d));

  for (std::size_t b = 0; b < queries.size(); ++b) {
    if (bar_out[b].isZero(0.0)) continue;
    const Matrix& q = queries[b];
    const Matrix phi_q = kernel_input_map(layer.kernel, q);
    const Vector w = prep.weights(q);

    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t l = 0; l < n; ++l) sum += w(static_cast<Eigen::Index>(l)) * prep.values[l];

    Matrix bar_sum;
    if (separable) {
      bar_sum = prep.factor.transpose() * bar_out[b];
    } else {
      bar_sum = q.transpose() * bar_out[b];
      bar_queries[b] += bar_out[b] * sum.transpose();
    }

    Matrix bar_phi_q = Matrix::Zero(d, d);
    for (std::size_t l = 0; l < n; ++l) {
      const double t = w(static_cast<Eigen::Index>(l));
      bar_values[l] += t * bar_sum;
      const double bar_t = (bar_sum.array() * prep.values[l].array()).sum();
      if (bar_t != 0.0 && t != 0.0) {
        scalar_grad_accumulate(sk, phi_q, prep.mapped_anchors[l], t, bar_t, bar_phi_q, bar_phi_anchor[l]);
      }
    }
    if (separable) {
      bar_queries[b] += bar_phi_q;
    } else {
      bar_queries[b] += bar_phi_q * prep.factor.transpose();
    }
  }

  for (std::size_t l = 0; l < n; ++l) {
    if (separable) {
      bar_anchors[l] += bar_phi_anchor[l];
      bar_coeffs[l] += bar_values[l];
    } else {
      bar_anchors[l] += bar_phi_anchor[l] * prep.factor.transpose();
      const Matrix c = layer.coeffs[l].dense();
      bar_coeffs[l] += anchors[l] * bar_values[l];
      bar_anchors[l] += c * bar_values[l].transpose();
    }
  }
}

/// Adds the adjoint of a Gram-matrix functional to the anchor images it was
/// assembled from.
void gram_vjp(const MatrixKernel& k, const GramMatrix& g, const Matrix& adjoint,
              const std::vector<Matrix>& points, std::vector<Matrix>& bar_points) {
  const int n = g.n();
  if (g.is_factored()) {
    const Matrix& s = g.as_factored().scalar_gram;
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < n; ++l) {
        if (i == l || adjoint(i, l) == 0.0) continue;
        scalar_grad_accumulate(k.scalar(), points[static_cast<std::size_t>(i)],
                               points[static_cast<std::size_t>(l)], s(i, l), adjoint(i, l),
                               bar_points[static_cast<std::size_t>(i)], bar_points[static_cast<std::size_t>(l)]);
      }
    }
    return;
  }
  const int d = g.d();
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) {
      const Matrix bar_block = adjoint.block(i * d, l * d, d, d);
      kernel_vjp(k, points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(l)], bar_block,
                 bar_points[static_cast<std::size_t>(i)], bar_points[static_cast<std::size_t>(l)]);
    }
  }
}

struct NormPenalty {
  double value = 0.0;
  Matrix bar_q;  // adjoint of the quadratic form
};

NormPenalty norm_penalty(const DeepModel& model, const LossConfig& cfg) {
  NormPenalty out;
  const std::size_t last = model.depth() - 1;
  const auto& images = model.anchor_images();
  const Layer& layer = model.layer(last);
  const int d = model.dim();
  Matrix q = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < layer.coeffs.size(); ++i) {
    q += layer.coeffs[i].dense().transpose() * images[last + 1][i];
  }
  const SpectralDecomposition sd = symmetric_eigen(q);
  const double top = std::max(sd.eigenvalues(0), 0.0);
  const Vector v = sd.eigenvectors.col(0);
  double weight = 0.0;
  if (cfg.squared_norm) {
    out.value = cfg.lambda2 * top;
    weight = cfg.lambda2;
  } else {
    out.value = cfg.lambda2 * std::sqrt(top);
    weight = top > 0.0 ? cfg.lambda2 / (2.0 * std::sqrt(top)) : 0.0;
  }
  out.bar_q = weight * v * v.transpose();
  return out;
}

}  // namespace

std::vector<Matrix> batch_forward(const DeepModel& model, const std::vector<Matrix>& inputs) {
  if (same_inputs(inputs, model.anchors())) return model.anchor_images().back();
  std::vector<Matrix> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) out.push_back(model.forward(x));
  return out;
}

ObjectiveTerms regularizer_terms(const DeepModel& model, const LossConfig& cfg) {
  cfg.validate();
  ObjectiveTerms t;
  if (cfg.lambda1 > 0.0) {
    const std::size_t last = model.depth() - 1;
    const GramMatrix g = gram(model.layer(last).kernel, model.anchor_images()[last]);
    t.reg_pf = pf_regularizer(g, cfg.eta, cfg.lambda1);
  }
  if (cfg.lambda2 > 0.0) t.reg_norm = norm_penalty(model, cfg).value;
  return t;
}

ObjectiveTerms objective(const DeepModel& model, const std::vector<Matrix>& inputs,
                         const std::vector<Matrix>& targets, const LossConfig& cfg) {
  ObjectiveTerms t = regularizer_terms(model, cfg);
  const std::vector<Matrix> preds = batch_forward(model, inputs);
  switch (cfg.kind) {
    case LossKind::OpNorm: t.data = loss_opnorm(preds, targets); break;
    case LossKind::HsMean: t.data = loss_hs(preds, targets); break;
    case LossKind::CrossEntropy:
      throw Error(ErrorCode::InvalidInput, "cross-entropy needs a classification head");
  }
  return t;
}

ObjectiveGradient backprop(const DeepModel& model, const std::vector<Matrix>& inputs,
                           double data_loss, const std::vector<Matrix>& output_adjoints,
                           const LossConfig& cfg) {
  cfg.validate();
  const std::size_t depth = model.depth();
  const std::size_t last = depth - 1;
  const auto& images = model.anchor_images();
  const auto& prepared = model.prepared();
  if (output_adjoints.size() != inputs.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one output adjoint per input is required");
  }

  ObjectiveGradient out;
  out.terms.data = data_loss;

  std::vector<std::vector<Matrix>> bar_images;
  bar_images.reserve(depth + 1);
  for (const auto& level : images) bar_images.push_back(zeros_like(level));
  std::vector<std::vector<Matrix>> bar_coeffs;
  for (std::size_t j = 0; j < depth; ++j) bar_coeffs.push_back(zeros_like(images[0]));

  const bool merged = same_inputs(inputs, model.anchors());
  std::vector<std::vector<Matrix>> batch_images;
  std::vector<std::vector<Matrix>> bar_batch;
  if (merged) {
    for (std::size_t i = 0; i < inputs.size(); ++i) bar_images[depth][i] += output_adjoints[i];
  } else {
    batch_images.push_back(inputs);
    for (std::size_t j = 0; j < depth; ++j) {
      std::vector<Matrix> next;
      next.reserve(inputs.size());
      for (const auto& h : batch_images.back()) next.push_back(prepared[j].apply(h));
      batch_images.push_back(std::move(next));
    }
    for (const auto& level : batch_images) bar_batch.push_back(zeros_like(level));
    bar_batch[depth] = output_adjoints;
  }

  if (cfg.lambda1 > 0.0) {
    const MatrixKernel& k = model.layer(last).kernel;
    const GramMatrix g = gram(k, images[last]);
    const RegularizerGradient rg = pf_regularizer_grad(g, cfg.eta, cfg.lambda1);
    out.terms.reg_pf = rg.value;
    gram_vjp(k, g, rg.adjoint, images[last], bar_images[last]);
  }
  if (cfg.lambda2 > 0.0) {
    const NormPenalty np = norm_penalty(model, cfg);
    out.terms.reg_norm = np.value;
    const Layer& layer = model.layer(last);
    for (std::size_t i = 0; i < layer.coeffs.size(); ++i) {
      bar_coeffs[last][i] += images[depth][i] * np.bar_q.transpose();
      bar_images[depth][i] += layer.coeffs[i].dense() * np.bar_q;
    }
  }

  for (std::size_t jj = depth; jj-- > 0;) {
    const Layer& layer = model.layer(jj);
    if (!merged) {
      layer_vjp(layer, prepared[jj], images[jj], batch_images[jj], bar_batch[jj + 1], bar_batch[jj],
                bar_images[jj], bar_coeffs[jj]);
    }
    layer_vjp(layer, prepared[jj], images[jj], images[jj], bar_images[jj + 1], bar_images[jj],
              bar_images[jj], bar_coeffs[jj]);
  }

  require_finite(out.terms.total(), "objective is not finite");
  out.grads.layers.resize(depth);
  for (std::size_t j = 0; j < depth; ++j) {
    const AlgebraDescriptor& desc = model.layer(j).coeff_desc;
    out.grads.layers[j].reserve(bar_coeffs[j].size());
    for (const auto& g : bar_coeffs[j]) {
      if (!g.allFinite()) throw Error(ErrorCode::NonFinite, "gradient is not finite");
      out.grads.layers[j].push_back(project_onto(g, desc));
    }
  }
  return out;
}

ObjectiveGradient objective_grad(const DeepModel& model, const std::vector<Matrix>& inputs,
                                 const std::vector<Matrix>& targets, const LossConfig& cfg) {
  const std::vector<Matrix> preds = batch_forward(model, inputs);
  LossValue lv;
  switch (cfg.kind) {
    case LossKind::OpNorm: lv = loss_opnorm_grad(preds, targets); break;
    case LossKind::HsMean: lv = loss_hs_grad(preds, targets); break;
    case LossKind::CrossEntropy:
      throw Error(ErrorCode::InvalidInput, "cross-entropy needs a classification head");
  }
  return backprop(model, inputs, lv.value, lv.adjoints, cfg);
}

GradientSet grad_params(const DeepModel& model, const std::vector<Matrix>& inputs,
                        const std::vector<Matrix>& targets, const LossConfig& cfg) {
  return objective_grad(model, inputs, targets, cfg).grads;
}

// --- optimizers ---------------------------------------------------------------

void adam_update(Vector& param, const Vector& grad, Vector& m, Vector& v, long step, double lr,
                 double beta1, double beta2, double eps) {
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

OptimizerState OptimizerState::sgd(double lr) {
  OptimizerState s;
  s.kind = OptimizerKind::SGD;
  s.lr = lr;
  return s;
}

OptimizerState OptimizerState::adam(double lr) {
  OptimizerState s;
  s.kind = OptimizerKind::Adam;
  s.lr = lr;
  return s;
}

void optimizer_step(OptimizerState& state, DeepModel& model, const GradientSet& grads) {
  if (grads.layers.size() != model.depth()) throw Error(ErrorCode::ShapeMismatch, "gradient depth mismatch");
  for (std::size_t j = 0; j < model.depth(); ++j) {
    if (grads.layers[j].size() != model.layer(j).coeffs.size()) {
      throw Error(ErrorCode::ShapeMismatch, "gradient count mismatch");
    }
    for (const auto& g : grads.layers[j]) {
      if (!(g.desc() == model.layer(j).coeff_desc)) {
        throw Error(ErrorCode::ShapeMismatch, "gradient descriptor mismatch");
      }
    }
  }
  ++state.step_count;
  if (state.kind == OptimizerKind::Adam && state.m.empty()) {
    for (const auto& layer : model.layers()) {
      std::vector<Vector> zeros;
      for (const auto& c : layer.coeffs) zeros.push_back(Vector::Zero(c.params().size()));
      state.m.push_back(zeros);
      state.v.push_back(std::move(zeros));
    }
  }
  model.update_coeffs([&](std::size_t j, std::size_t i, AlgebraElement& c) {
    Vector p = c.params();
    const Vector g = grads.layers[j][i].params();
    if (state.kind == OptimizerKind::SGD) {
      p -= state.lr * g;
    } else {
      adam_update(p, g, state.m[j][i], state.v[j][i], state.step_count, state.lr, state.beta1,
                  state.beta2, state.eps);
    }
    c = AlgebraElement::from_params(c.desc(), p);
  });
}

// --- finite differences -------------------------------------------------------

namespace {

/// Signs of every Laplacian kernel argument difference evaluated by the
/// objective; a change means a perturbation crossed a kink.
std::vector<std::int8_t> kink_signature(const DeepModel& model, const std::vector<Matrix>& inputs) {
  std::vector<std::int8_t> sig;
  const auto& images = model.anchor_images();
  const bool merged = same_inputs(inputs, model.anchors());
  std::vector<Matrix> batch = inputs;
  for (std::size_t j = 0; j < model.depth(); ++j) {
    const MatrixKernel& k = model.layer(j).kernel;
    std::vector<Matrix> mapped;
    for (const auto& z : images[j]) mapped.push_back(kernel_input_map(k, z));
    auto push_pair = [&](const Matrix& a, const Matrix& b) {
      for (Eigen::Index e = 0; e < a.size(); ++e) {
        const double diff = a.data()[e] - b.data()[e];
        sig.push_back(static_cast<std::int8_t>((diff > 0.0) - (diff < 0.0)));
      }
    };
    if (k.scalar().kind == ScalarKernelKind::Laplacian) {
      for (std::size_t i = 0; i < mapped.size(); ++i) {
        for (std::size_t l = i + 1; l < mapped.size(); ++l) push_pair(mapped[i], mapped[l]);
      }
      if (!merged) {
        for (const auto& h : batch) {
          const Matrix mh = kernel_input_map(k, h);
          for (const auto& m : mapped) push_pair(mh, m);
        }
      }
    }
    if (!merged) {
      for (auto& h : batch) h = model.prepared()[j].apply(h);
    }
  }
  return sig;
}

double top_gap(const Matrix& sym) {
  const SpectralDecomposition sd = symmetric_eigen(sym);
  if (sd.eigenvalues.size() < 2) return std::numeric_limits<double>::infinity();
  return sd.eigenvalues(0) - sd.eigenvalues(1);
}

double bottom_gap(const Matrix& sym) {
  const SpectralDecomposition sd = symmetric_eigen(sym);
  const Eigen::Index n = sd.eigenvalues.size();
  if (n < 2) return std::numeric_limits<double>::infinity();
  return sd.eigenvalues(n - 2) - sd.eigenvalues(n - 1);
}

/// Smallest eigengap among the operator norms the objective differentiates.
double min_eigengap(const DeepModel& model, const std::vector<Matrix>& inputs,
                    const std::vector<Matrix>& targets, const LossConfig& cfg) {
  double gap = std::numeric_limits<double>::infinity();
  if (cfg.kind == LossKind::OpNorm) {
    gap = std::min(gap, top_gap(mean_residual_gram(batch_forward(model, inputs), targets)));
  }
  const std::size_t last = model.depth() - 1;
  if (cfg.lambda1 > 0.0) {
    const GramMatrix g = gram(model.layer(last).kernel, model.anchor_images()[last]);
    const Matrix m = g.is_factored() ? g.as_factored().scalar_gram : g.materialize();
    gap = std::min({gap, top_gap(m), bottom_gap(m)});
  }
  if (cfg.lambda2 > 0.0) {
    const Layer& layer = model.layer(last);
    Matrix q = Matrix::Zero(model.dim(), model.dim());
    for (std::size_t i = 0; i < layer.coeffs.size(); ++i) {
      q += layer.coeffs[i].dense().transpose() * model.anchor_images()[last + 1][i];
    }
    gap = std::min(gap, top_gap(0.5 * (q + q.transpose())));
  }
  return gap;
}

}  // namespace

FiniteDiffReport finite_diff_check(const DeepModel& model, const std::vector<Matrix>& inputs,
                                   const std::vector<Matrix>& targets, const LossConfig& cfg,
                                   double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidInput, "finite-difference step must be positive");
  const GradientSet grads = grad_params(model, inputs, targets, cfg);

  struct Probe {
    std::size_t layer, index;
    Eigen::Index param;
    double analytic;
  };
  std::vector<Probe> probes;
  double max_analytic = 0.0;
  for (std::size_t j = 0; j < model.depth(); ++j) {
    const AlgebraDescriptor& desc = model.layer(j).coeff_desc;
    for (std::size_t i = 0; i < grads.layers[j].size(); ++i) {
      const Matrix g = grads.layers[j][i].dense();
      const auto dof = static_cast<Eigen::Index>(desc.degrees_of_freedom());
      for (Eigen::Index k = 0; k < dof; ++k) {
        Vector e = Vector::Zero(dof);
        e(k) = 1.0;
        const double a = (g.array() * AlgebraElement::from_params(desc, e).dense().array()).sum();
        probes.push_back({j, i, k, a});
        max_analytic = std::max(max_analytic, std::abs(a));
      }
    }
  }

  FiniteDiffReport report;
  if (min_eigengap(model, inputs, targets, cfg) < 1e-10) {
    report.skipped = probes.size();
    return report;
  }
  const auto base_sig = kink_signature(model, inputs);
  const double floor = 1e-3 * max_analytic;

  auto perturbed = [&](const Probe& p, double h) {
    DeepModel copy = model;
    const AlgebraElement& c = model.layer(p.layer).coeffs[p.index];
    Vector params = c.params();
    params(p.param) += h;
    copy.set_coeff(p.layer, p.index, AlgebraElement::from_params(c.desc(), params));
    return copy;
  };

  for (const auto& p : probes) {
    const DeepModel far_plus = perturbed(p, 10.0 * step);
    const DeepModel far_minus = perturbed(p, -10.0 * step);
    if (kink_signature(far_plus, inputs) != base_sig || kink_signature(far_minus, inputs) != base_sig) {
      ++report.skipped;
      continue;
    }
    const double f_plus = objective(perturbed(p, step), inputs, targets, cfg).total();
    const double f_minus = objective(perturbed(p, -step), inputs, targets, cfg).total();
    const double numeric = (f_plus - f_minus) / (2.0 * step);
    const double denom = std::max({std::abs(p.analytic), std::abs(numeric), floor});
    const double rel = denom == 0.0 ? 0.0 : std::abs(p.analytic - numeric) / denom;
    report.max_rel_error = std::max(report.max_rel_error, rel);
    ++report.checked;
  }
  return report;
}

}  // namespace rkhm
