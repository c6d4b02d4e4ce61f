// Acceptance run: one PASS/FAIL line per criterion. `--only N` runs a single
// criterion; experiment outputs go under --out.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "rkhm/bounds.hpp"
#include "rkhm/experiments.hpp"
#include "rkhm/pfnorm.hpp"
#include "rkhm/training.hpp"
#include "test_util.hpp"

using namespace rkhm;
using namespace rkhm::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

AlgebraDescriptor descriptor_by_index(std::mt19937_64& rng, int which, int d) {
  switch (which % 3) {
    case 0: return AlgebraDescriptor::full(d);
    case 1: return AlgebraDescriptor::block_diag(random_partition(rng, d));
    default: return AlgebraDescriptor::circulant(d);
  }
}

Outcome c1_cstar_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> dim(1, 12);
  std::uniform_real_distribution<double> scale(-3.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const AlgebraDescriptor desc = descriptor_by_index(rng, i, dim(rng));
    const AlgebraElement a = random_element(rng, desc, std::pow(10.0, scale(rng)));
    const double na = op_norm(a);
    const double err = std::abs(op_norm(mul(adjoint(a), a)) - na * na) / (1.0 + na * na);
    worst = std::max(worst, err);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-10 && t < 10.0, "worst scaled error " + fmt(worst) + ", " + fmt(t) + " s"};
}

Outcome c2_circulant_convolution() {
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<int> dim(1, 32);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int d = dim(rng);
    const AlgebraDescriptor desc = AlgebraDescriptor::circulant(d);
    const AlgebraElement a = random_element(rng, desc), b = random_element(rng, desc);
    const Vector va = a.dense().row(0).transpose(), vb = b.dense().row(0).transpose();
    // Direct circular convolution of first rows.
    Vector conv = Vector::Zero(d);
    for (int k = 0; k < d; ++k) {
      for (int m = 0; m < d; ++m) conv(k) += va(m) * vb(((k - m) % d + d) % d);
    }
    const Matrix prod = mul(a, b).dense();
    Matrix oracle(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) oracle(r, c) = conv(((c - r) % d + d) % d);
    }
    worst = std::max(worst, max_abs(prod - oracle));
  }
  return {worst <= 1e-12, "max abs error " + fmt(worst)};
}

Outcome c3_gram() {
  std::mt19937_64 rng(1003);
  std::uniform_int_distribution<int> dim(1, 10), count(1, 20);
  std::uniform_real_distribution<double> cdist(0.01, 1.0);
  double min_eig = 1e300, worst_fact = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int d = dim(rng), n = count(rng);
    const AlgebraDescriptor desc = descriptor_by_index(rng, i, d);
    const ScalarKernel sk{i % 2 ? ScalarKernelKind::Gaussian : ScalarKernelKind::Laplacian, cdist(rng)};
    const MatrixKernel k = MatrixKernel::separable(sk, random_pd_element(rng, desc));
    const auto pts = random_points(rng, n, d);
    const Matrix dense = gram_dense(k, pts).materialize();
    const Matrix fact = gram(k, pts).materialize();
    const Matrix sym = 0.5 * (dense + dense.transpose());
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().minCoeff());
    worst_fact = std::max(worst_fact, max_abs(dense - fact));
  }
  return {min_eig >= -1e-8 && worst_fact <= 1e-10,
          "min eigenvalue " + fmt(min_eig) + ", factored vs dense " + fmt(worst_fact)};
}

Outcome c4_pf_norms() {
  std::mt19937_64 rng(1004);
  std::uniform_int_distribution<int> dim(1, 4), count(1, 8);
  double self_err = 0.0, oracle_err = 0.0;
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const int d = dim(rng), n = count(rng);
    const int N = d * n;
    const Matrix a = random_spd(rng, N, 0.2), b = random_spd(rng, N, 0.2);
    const GramMatrix g1 = GramMatrix::dense(a, d), gl = GramMatrix::dense(b, d);
    self_err = std::max(self_err, std::abs(pf_norm_exact(g1, g1) - 1.0));
    self_err = std::max(self_err, std::abs(pf_norm_exact(gl, gl) - 1.0));
    const double exact = pf_norm_exact(g1, gl);
    if (exact > pf_norm_bound(g1, gl) * (1.0 + 1e-12)) ++violations;
    // Oracle: largest singular value of G_L^{1/2} G_1^{-1/2}.
    Eigen::SelfAdjointEigenSolver<Matrix> e1(a), el(b);
    const Matrix m = el.operatorSqrt() * e1.operatorInverseSqrt();
    const double oracle = Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
    oracle_err = std::max(oracle_err, std::abs(exact - oracle) / oracle);
  }
  return {self_err <= 1e-8 && violations == 0 && oracle_err <= 1e-8,
          "|pf(G,G)-1| " + fmt(self_err) + ", exact>bound " + std::to_string(violations) +
              ", oracle rel error " + fmt(oracle_err)};
}

Outcome c5_bounds() {
  BoundInputs unit;
  unit.B = {1.0};
  const double k_err = std::abs(deep_bound(unit).K_tilde - 8.0 * std::sqrt(2.0));

  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  std::uniform_int_distribution<int> nd(1, 500), depth(1, 4);
  auto sample = [&](int L) {
    BoundInputs in;
    in.D = u(rng);
    for (int j = 0; j < L; ++j) in.B.push_back(u(rng));
    in.E = u(rng);
    in.delta = 0.01 + 0.2 * u(rng) / 3.0;
    in.n = nd(rng);
    in.trace_sum = in.n * u(rng);
    in.empirical = u(rng);
    return in;
  };
  int shallow_mismatch = 0, monotone_fail = 0;
  for (int t = 0; t < 200; ++t) {
    const BoundInputs s = sample(1);
    if (deep_bound(s).total != shallow_bound(s.D, s.B[0], s.E, s.delta, s.n, s.trace_sum, s.empirical).total) {
      ++shallow_mismatch;
    }
    const BoundInputs in = sample(depth(rng));
    const double base = deep_bound(in).total;
    BoundInputs up = in;
    up.D *= 1.3;
    monotone_fail += deep_bound(up).total < base;
    up = in;
    up.E *= 1.3;
    monotone_fail += deep_bound(up).total < base;
    for (std::size_t j = 0; j < in.B.size(); ++j) {
      up = in;
      up.B[j] *= 1.3;
      monotone_fail += deep_bound(up).total < base;
    }
    up = in;
    up.delta *= 0.5;
    monotone_fail += deep_bound(up).total < base;
    up = in;
    up.n *= 2;
    monotone_fail += deep_bound(up).term_confidence > deep_bound(in).term_confidence;
  }
  return {k_err <= 1e-12 && shallow_mismatch == 0 && monotone_fail == 0,
          "K~ error " + fmt(k_err) + ", shallow mismatches " + std::to_string(shallow_mismatch) +
              ", monotonicity failures " + std::to_string(monotone_fail)};
}

Outcome c6_finite_differences() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1006);
  ModelSpec spec;
  spec.d = 4;
  spec.n = 3;
  spec.coeff_descs = {AlgebraDescriptor::full(4), AlgebraDescriptor::full(4)};
  const DeepModel m = random_model(rng, spec);
  const auto targets = random_points(rng, 3, 4);
  LossConfig cfg;
  cfg.kind = LossKind::OpNorm;
  cfg.lambda1 = 0.1;
  cfg.lambda2 = 0.01;
  const FiniteDiffReport r = finite_diff_check(m, m.anchors(), targets, cfg, 1e-6);
  const double t = seconds_since(t0);
  return {r.checked > 0 && r.max_rel_error <= 1e-4 && r.skipped_fraction() <= 0.05 && t < 60.0,
          "worst rel error " + fmt(r.max_rel_error) + ", checked " + std::to_string(r.checked) + ", skipped " +
              std::to_string(r.skipped) + ", " + fmt(t) + " s"};
}

std::vector<double> finals(const ExperimentResult& r, const std::string& arm, const std::string& col) {
  std::vector<double> out;
  for (const auto& run : r.runs) {
    if (run.arm == arm && run.log.info.value("status", "") == "ok") out.push_back(run.log.final_value(col));
  }
  return out;
}

ExperimentConfig experiment_config(ExperimentKind kind, const fs::path& out) {
  ExperimentConfig c = ExperimentConfig::defaults(kind);
  c.mnist.train_images = (fs::path(RKHM_SOURCE_DIR) / c.mnist.train_images).string();
  c.mnist.train_labels = (fs::path(RKHM_SOURCE_DIR) / c.mnist.train_labels).string();
  c.mnist.test_images = (fs::path(RKHM_SOURCE_DIR) / c.mnist.test_images).string();
  c.mnist.test_labels = (fs::path(RKHM_SOURCE_DIR) / c.mnist.test_labels).string();
  c.output_dir = out.string();
  return c;
}

Outcome c7_autoencoder(const fs::path& out) {
  const auto t0 = Clock::now();
  const ExperimentResult r = run_experiment(experiment_config(ExperimentKind::Autoencoder, out));
  const double t = seconds_since(t0);
  const auto g_rkhm = finals(r, "rkhm", "gap"), g_vv = finals(r, "vvrkhs", "gap");
  if (g_rkhm.size() != 5 || g_vv.size() != 5) return {false, "not all runs finished (" + fmt(t) + " s)"};
  int reached = 0;
  for (const auto& run : r.runs) reached += run.log.info.value("stop_reason", "") == "reached_stop_loss";
  const double m_rkhm = median(g_rkhm), m_vv = median(g_vv);
  return {m_rkhm <= m_vv && t <= 15 * 60.0,
          "median gap rkhm " + fmt(m_rkhm) + " vs vvrkhs " + fmt(m_vv) + ", runs reaching loss 0.05: " +
              std::to_string(reached) + "/10, " + fmt(t) + " s"};
}

Outcome c8_benign(const fs::path& out) {
  const auto t0 = Clock::now();
  const ExperimentResult r = run_experiment(experiment_config(ExperimentKind::Benign, out));
  const double t = seconds_since(t0);
  const auto g0 = finals(r, "lambda1_0", "gap"), g1 = finals(r, "lambda1_100", "gap");
  if (g0.size() != 3 || g1.size() != 3) return {false, "not all runs finished (" + fmt(t) + " s)"};
  int wins = 0;
  std::string per_seed;
  for (std::size_t s = 0; s < 3; ++s) {
    wins += g1[s] < g0[s];
    per_seed += (s ? "; " : "") + fmt(g1[s]) + " vs " + fmt(g0[s]);
  }
  return {wins >= 2 && t <= 20 * 60.0, "lambda1=100 lower in " + std::to_string(wins) + "/3 seeds (" + per_seed +
                                           "), " + fmt(t) + " s"};
}

Outcome c9_mnist(const fs::path& out) {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = experiment_config(ExperimentKind::Mnist, out);
  const ExperimentResult r = run_experiment(cfg);
  const double t = seconds_since(t0);
  bool pass = t <= 15 * 60.0;
  std::string detail;
  for (double l1 : cfg.lambda1) {
    char arm[32];
    std::snprintf(arm, sizeof arm, "lambda1_%g", l1);
    const auto tr = finals(r, arm, "train_acc"), te = finals(r, arm, "test_acc");
    if (tr.empty()) {
      pass = false;
      detail += std::string(arm) + ": no finished runs; ";
      continue;
    }
    const double mtr = median(tr), mte = median(te);
    pass = pass && mtr == 1.0 && mte >= 0.30;
    detail += std::string(arm) + " median train " + fmt(mtr) + " test " + fmt(mte) + "; ";
  }
  return {pass, detail + fmt(t) + " s"};
}

Outcome c10_determinism(const fs::path& out) {
  std::vector<std::string> mismatched;
  int compared = 0;
  for (auto kind : {ExperimentKind::Autoencoder, ExperimentKind::Benign, ExperimentKind::Mnist}) {
    ExperimentConfig c = experiment_config(kind, out / "a");
    c.runs = 1;
    c.seed = 7;
    c.max_epochs = kind == ExperimentKind::Mnist ? 4 : 60;
    c.eval_every = kind == ExperimentKind::Mnist ? 2 : 20;
    c.test_size = kind == ExperimentKind::Mnist ? 100 : 200;
    run_experiment(c);
    c.output_dir = (out / "b").string();
    run_experiment(c);
    for (const auto& entry : fs::directory_iterator(out / "a")) {
      const std::string name = entry.path().filename().string();
      if (name.rfind(experiment_name(kind), 0) != 0) continue;
      if (name.find(".train.csv") != std::string::npos || name.find("_timing.json") != std::string::npos) continue;
      std::ifstream fa(entry.path(), std::ios::binary), fb(out / "b" / name, std::ios::binary);
      const std::string a((std::istreambuf_iterator<char>(fa)), {}), b((std::istreambuf_iterator<char>(fb)), {});
      ++compared;
      if (a.empty() || a != b) mismatched.push_back(name);
    }
  }
  std::string detail = std::to_string(compared) + " files compared";
  for (const auto& m : mismatched) detail += ", differs: " + m;
  return {compared >= 9 && mismatched.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  std::string out = "acceptance_out";
  app.add_option("--only", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--out", out, "Directory for experiment outputs");
  CLI11_PARSE(app, argc, argv);

  const fs::path root(out);
  const std::map<int, std::function<Outcome()>> criteria{
      {1, c1_cstar_identity},
      {2, c2_circulant_convolution},
      {3, c3_gram},
      {4, c4_pf_norms},
      {5, c5_bounds},
      {6, c6_finite_differences},
      {7, [&] { return c7_autoencoder(root / "c7"); }},
      {8, [&] { return c8_benign(root / "c8"); }},
      {9, [&] { return c9_mnist(root / "c9"); }},
      {10, [&] {
         fs::remove_all(root / "c10");
         return c10_determinism(root / "c10");
       }},
  };

  bool all = true;
  for (const auto& [id, run] : criteria) {
    if (only != 0 && id != only) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
