#pragma once

#include <vector>

#include "rkhm/model.hpp"

namespace rkhm {

struct BoundInputs {
  double D = 1.0;          // sup_x || k_L(x, x) ||_op
  std::vector<double> B;   // B_1..B_L
  double E = 1.0;          // bound on || y ||_op
  double delta = 0.05;
  int n = 1;
  double trace_sum = 0.0;  // sum_i tr k_1(x_i, x_i)
  double empirical = 0.0;  // || (1/n) sum_i |g(x_i, y_i)|^2 ||_op
};

struct BoundReport {
  double K_tilde = 0.0;
  double M_tilde = 0.0;
  double term_empirical = 0.0;
  double term_complexity = 0.0;
  double term_confidence = 0.0;
  double total = 0.0;
};

/// Generalization bound for a depth-L RKHM:
///   K~ = 4 sqrt(2) (sqrt(D) B_L + E) B_1 ... B_L,  M~ = 6 (sqrt(D) B_L + E)^2,
///   total = empirical + (K~ / n) trace_sum^{1/2} + M~ sqrt(log(2 / delta) / (2n)).
BoundReport deep_bound(const BoundInputs& in);

/// Single-layer bound written out with B_1 only; equals deep_bound at L = 1.
BoundReport shallow_bound(double D, double B1, double E, double delta, int n, double trace_sum,
                          double empirical);

/// (1/n) * pf_norm * fL_norm * sqrt(trace_sum).
double rademacher_deep_bound(double pf_norm, double fL_norm, double trace_sum, int n);

/// d * trace_sum: the trace term after flattening A to a d^2-dimensional
/// Hilbert space.
double vv_trace_factor(double trace_sum, int d);

/// Plug-in estimates from a trained model: D from the training anchor images,
/// B_L from the last layer's RKHM norm, B_j (j < L) from the exact PF norm
/// between consecutive layer Grams, E from the targets. These are sample
/// estimates, not certified suprema.
BoundInputs estimate_bound_inputs(const DeepModel& model, const std::vector<Matrix>& targets,
                                  double delta, double empirical);

}  // namespace rkhm
