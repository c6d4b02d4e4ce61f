#include "rkhm/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "rkhm/pfnorm.hpp"

namespace rkhm {

namespace {

void check_common(double D, double E, double delta, int n, double trace_sum, double empirical) {
  if (!(D > 0.0) || !std::isfinite(D)) throw Error(ErrorCode::InvalidInput, "D must be positive");
  if (!(E >= 0.0) || !std::isfinite(E)) throw Error(ErrorCode::InvalidInput, "E must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidInput, "delta must lie in (0, 1)");
  if (n < 1) throw Error(ErrorCode::InvalidInput, "n must be at least 1");
  if (!(trace_sum >= 0.0)) throw Error(ErrorCode::InvalidInput, "trace_sum must be nonnegative");
  if (!(empirical >= 0.0)) throw Error(ErrorCode::InvalidInput, "empirical term must be nonnegative");
}

}  // namespace

BoundReport deep_bound(const BoundInputs& in) {
  check_common(in.D, in.E, in.delta, in.n, in.trace_sum, in.empirical);
  if (in.B.empty()) throw Error(ErrorCode::InvalidInput, "B needs one entry per layer");
  double product = 1.0;
  for (double b : in.B) {
    if (!(b > 0.0) || !std::isfinite(b)) throw Error(ErrorCode::InvalidInput, "B_j must be positive");
    product *= b;
  }
  const double scale = std::sqrt(in.D) * in.B.back() + in.E;
  BoundReport r;
  r.K_tilde = 4.0 * std::sqrt(2.0) * scale * product;
  r.M_tilde = 6.0 * scale * scale;
  const double n = static_cast<double>(in.n);
  r.term_empirical = in.empirical;
  r.term_complexity = r.K_tilde / n * std::sqrt(in.trace_sum);
  r.term_confidence = r.M_tilde * std::sqrt(std::log(2.0 / in.delta) / (2.0 * n));
  r.total = r.term_empirical + r.term_complexity + r.term_confidence;
  return r;
}

BoundReport shallow_bound(double D, double B1, double E, double delta, int n, double trace_sum,
                          double empirical) {
  check_common(D, E, delta, n, trace_sum, empirical);
  if (!(B1 > 0.0)) throw Error(ErrorCode::InvalidInput, "B_1 must be positive");
  BoundReport r;
  r.K_tilde = 4.0 * std::sqrt(2.0) * (std::sqrt(D) * B1 + E) * B1;
  r.M_tilde = 6.0 * (std::sqrt(D) * B1 + E) * (std::sqrt(D) * B1 + E);
  r.term_empirical = empirical;
  r.term_complexity = r.K_tilde / static_cast<double>(n) * std::sqrt(trace_sum);
  r.term_confidence = r.M_tilde * std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
  r.total = r.term_empirical + r.term_complexity + r.term_confidence;
  return r;
}

double rademacher_deep_bound(double pf_norm, double fL_norm, double trace_sum, int n) {
  if (pf_norm < 0.0 || fL_norm < 0.0 || trace_sum < 0.0 || n < 1) {
    throw Error(ErrorCode::InvalidInput, "arguments must be nonnegative and n >= 1");
  }
  return pf_norm * fL_norm * std::sqrt(trace_sum) / static_cast<double>(n);
}

double vv_trace_factor(double trace_sum, int d) {
  if (trace_sum < 0.0 || d < 1) throw Error(ErrorCode::InvalidInput, "trace_sum >= 0 and d >= 1");
  return static_cast<double>(d) * trace_sum;
}

BoundInputs estimate_bound_inputs(const DeepModel& model, const std::vector<Matrix>& targets,
                                  double delta, double empirical) {
  const auto& images = model.anchor_images();
  const std::size_t depth = model.depth();
  const Layer& last = model.layer(depth - 1);

  BoundInputs in;
  in.delta = delta;
  in.n = static_cast<int>(model.anchor_count());
  in.empirical = empirical;
  in.D = 0.0;
  for (const auto& x : images[depth - 1]) {
    in.D = std::max(in.D, op_norm(kernel_eval(last.kernel, x, x)));
  }
  in.E = 0.0;
  for (const auto& y : targets) {
    in.E = std::max(in.E, op_norm(AlgebraElement::make(AlgebraDescriptor::full(static_cast<int>(y.rows())), y)));
  }
  in.trace_sum = trace_sum(model.layer(0).kernel, images[0]);

  std::vector<GramMatrix> grams;
  grams.reserve(depth);
  for (std::size_t j = 0; j < depth; ++j) grams.push_back(gram(model.layer(j).kernel, images[j]));
  for (std::size_t j = 0; j + 1 < depth; ++j) in.B.push_back(pf_norm_exact(grams[j], grams[j + 1]));
  in.B.push_back(rkhm_norm(last, images[depth - 1]));
  return in;
}

}  // namespace rkhm
