#include "rkhm/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <random>

#include "rkhm/bounds.hpp"
#include "rkhm/data.hpp"
#include "rkhm/head.hpp"
#include "rkhm/pfnorm.hpp"

namespace rkhm {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Separate stream for initialization so data and init draws never interleave.
std::mt19937_64 init_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x1u};
  return std::mt19937_64(seq);
}

/// init_block on every pattern entry plus N(0, init_noise).
AlgebraElement init_coeff(const AlgebraDescriptor& desc, double block, double noise, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, noise > 0.0 ? noise : 1.0);
  Vector p(static_cast<Eigen::Index>(desc.degrees_of_freedom()));
  for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = block + (noise > 0.0 ? dist(rng) : 0.0);
  return AlgebraElement::from_params(desc, p);
}

Layer make_layer(MatrixKernel kernel, const AlgebraDescriptor& desc, int n, const ExperimentConfig& cfg,
                 std::mt19937_64& rng) {
  std::vector<AlgebraElement> coeffs;
  coeffs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) coeffs.push_back(init_coeff(desc, cfg.init_block, cfg.init_noise, rng));
  return Layer{std::move(kernel), desc, std::move(coeffs)};
}

OptimizerState make_optimizer(const ExperimentConfig& cfg) {
  return cfg.optimizer == OptimizerKind::Adam ? OptimizerState::adam(cfg.lr) : OptimizerState::sgd(cfg.lr);
}

std::vector<Matrix> predict(const DeepModel& model, const std::vector<Matrix>& xs) {
  std::vector<Matrix> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(model.forward(x));
  return out;
}

std::string train_log_path(const ExperimentConfig& cfg, const std::string& stem) {
  if (cfg.output_dir.empty() || !cfg.train_log) return {};
  return (std::filesystem::path(cfg.output_dir) / (stem + ".train.csv")).string();
}

Json try_bound(const DeepModel& model, const std::vector<Matrix>& targets, double empirical) {
  try {
    const BoundInputs in = estimate_bound_inputs(model, targets, 0.05, empirical);
    return Json{{"inputs", bound_inputs_to_json(in)}, {"report", bound_report_to_json(deep_bound(in))}};
  } catch (const Error& e) {
    return Json{{"error", e.what()}};
  }
}

// --- regression runs (autoencoder, benign) ------------------------------------

struct RegressionTask {
  std::vector<Matrix> train_x, train_y, test_x, test_y;
};

struct RegressionOptions {
  LossConfig loss;
  std::optional<double> stop_loss;
  bool track_gram = false;  // log eigen extrema of the last layer's Gram
};

MetricsLog run_regression(DeepModel& model, const RegressionTask& task, const RegressionOptions& opt,
                          const ExperimentConfig& cfg, const std::string& log_path) {
  std::vector<std::string> cols{"epoch", "train_loss", "train_opnorm", "test_opnorm", "gap",
                                "reg_pf", "reg_norm", "total", "grad_norm"};
  if (opt.track_gram) {
    cols.push_back("gl_eig_min");
    cols.push_back("gl_eig_max");
  }
  MetricsLog log(cols);
  TrainLog train_log = log_path.empty() ? TrainLog() : TrainLog(log_path);
  OptimizerState state = make_optimizer(cfg);
  const auto start = Clock::now();

  for (long epoch = 0;; ++epoch) {
    const ObjectiveGradient og = objective_grad(model, task.train_x, task.train_y, opt.loss);
    const double grad_norm = og.grads.norm();
    train_log.write(epoch, og.terms.data, og.terms.reg_pf, og.terms.reg_norm, og.terms.total(), grad_norm,
                    elapsed_ms(start));

    const bool reached = opt.stop_loss && og.terms.data <= *opt.stop_loss;
    const bool capped = epoch >= cfg.max_epochs;
    if (reached || capped || epoch % cfg.eval_every == 0) {
      const double train_op = loss_opnorm(batch_forward(model, task.train_x), task.train_y);
      const double test_op = loss_opnorm(predict(model, task.test_x), task.test_y);
      std::vector<double> row{static_cast<double>(epoch), og.terms.data, train_op, test_op, test_op - train_op,
                              og.terms.reg_pf, og.terms.reg_norm, og.terms.total(), grad_norm};
      if (opt.track_gram) {
        const std::size_t last = model.depth() - 1;
        const auto [lo, hi] =
            gram_eigen_extrema(gram(model.layer(last).kernel, model.anchor_images()[last]));
        row.push_back(lo);
        row.push_back(hi);
      }
      log.add_row(std::move(row));
    }
    if (reached || capped) {
      log.info["stop_reason"] = reached ? "reached_stop_loss" : "epoch_cap";
      log.info["stop_epoch"] = epoch;
      break;
    }
    optimizer_step(state, model, og.grads);
  }
  log.info["bound"] = try_bound(model, task.train_y, log.final_value("train_opnorm"));
  return log;
}

MetricsLog run_autoencoder_arm(const ExperimentConfig& cfg, const std::string& arm, std::uint64_t seed,
                               const std::string& log_path) {
  const AutoencoderData data = gen_autoencoder_data(seed, cfg.n, cfg.d, cfg.test_size, 10, cfg.noise_std);
  const bool rkhm = arm == "rkhm";
  const int d = cfg.d;
  const std::vector<AlgebraDescriptor> descs =
      rkhm ? std::vector<AlgebraDescriptor>{AlgebraDescriptor::diagonal(d), AlgebraDescriptor::uniform_blocks(2, d),
                                            AlgebraDescriptor::full(d)}
           : std::vector<AlgebraDescriptor>(3, AlgebraDescriptor::full(d));
  const ScalarKernel lap{ScalarKernelKind::Laplacian, cfg.kernel_c};
  std::mt19937_64 rng = init_rng(seed);
  std::vector<Layer> layers;
  for (const auto& desc : descs) {
    layers.push_back(make_layer(MatrixKernel::separable(lap, AlgebraElement::identity(AlgebraDescriptor::full(d))),
                                desc, cfg.n, cfg, rng));
  }
  DeepModel model(std::move(layers), data.train);

  RegressionOptions opt;
  opt.loss.kind = rkhm ? LossKind::OpNorm : LossKind::HsMean;
  opt.loss.lambda1 = 0.0;
  opt.loss.lambda2 = cfg.lambda2;
  opt.loss.eta = cfg.eta;
  opt.loss.squared_norm = cfg.squared_norm;
  opt.stop_loss = cfg.stop_loss;
  MetricsLog log = run_regression(model, {data.train, data.train, data.test, data.test}, opt, cfg, log_path);
  log.info["loss"] = rkhm ? "opnorm" : "hs_mean";
  return log;
}

MetricsLog run_benign_arm(const ExperimentConfig& cfg, double lambda1, std::uint64_t seed,
                          const std::string& log_path) {
  const RegressionData data = gen_benign_data(seed, cfg.n, cfg.d, cfg.test_size, cfg.noise_std);
  const int d = cfg.d;
  const ScalarKernel lap{ScalarKernelKind::Laplacian, cfg.kernel_c};
  std::mt19937_64 rng = init_rng(seed);
  std::vector<Layer> layers;
  for (const auto& desc : {AlgebraDescriptor::full(d), AlgebraDescriptor::diagonal(d)}) {
    layers.push_back(make_layer(MatrixKernel::separable(lap, AlgebraElement::identity(AlgebraDescriptor::full(d))),
                                desc, cfg.n, cfg, rng));
  }
  DeepModel model(std::move(layers), data.train_x);

  RegressionOptions opt;
  opt.loss.kind = LossKind::OpNorm;
  opt.loss.lambda1 = lambda1;
  opt.loss.lambda2 = cfg.lambda2;
  opt.loss.eta = cfg.eta;
  opt.loss.squared_norm = cfg.squared_norm;
  opt.stop_loss = cfg.stop_loss;
  opt.track_gram = true;
  MetricsLog log =
      run_regression(model, {data.train_x, data.train_y, data.test_x, data.test_y}, opt, cfg, log_path);
  log.info["lambda1"] = lambda1;
  return log;
}

// --- MNIST ------------------------------------------------------------------

Matrix unflatten_row_major(const Vector& v, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = v(r * cols + c);
  }
  return m;
}

int argmax(const Vector& v) {
  Eigen::Index k = 0;
  v.maxCoeff(&k);
  return static_cast<int>(k);
}

AlgebraElement ones_blocks(int block, int d) {
  const AlgebraDescriptor desc = AlgebraDescriptor::uniform_blocks(block, d);
  return AlgebraElement::from_params(desc, Vector::Ones(static_cast<Eigen::Index>(desc.degrees_of_freedom())));
}

double accuracy(const DeepModel& model, const DenseHead& head, const std::vector<Matrix>& xs,
                const std::vector<int>& labels) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (argmax(dense_head_logits(head, flatten_row_major(model.forward(xs[i])))) == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(xs.size());
}

MetricsLog run_mnist_arm(const ExperimentConfig& cfg, double lambda1, std::uint64_t seed,
                         const std::string& log_path) {
  const LabeledImages pool = load_mnist_idx(cfg.mnist.train_images, cfg.mnist.train_labels);
  const LabeledImages test = load_mnist_idx(cfg.mnist.test_images, cfg.mnist.test_labels);
  const int d = cfg.d;
  if (pool.images.empty() || pool.images.front().rows() != d || pool.images.front().cols() != d) {
    throw Error(ErrorCode::DimMismatch, "MNIST images are not d x d");
  }
  std::vector<Matrix> train_x;
  std::vector<int> train_y;
  for (std::size_t idx : stratified_subset(pool.labels, cfg.n, 10, seed)) {
    train_x.push_back(pool.images[idx]);
    train_y.push_back(pool.labels[idx]);
  }
  const std::size_t test_count = std::min(test.images.size(), static_cast<std::size_t>(cfg.test_size));
  const std::vector<Matrix> test_x(test.images.begin(), test.images.begin() + static_cast<std::ptrdiff_t>(test_count));
  const std::vector<int> test_y(test.labels.begin(), test.labels.begin() + static_cast<std::ptrdiff_t>(test_count));

  const ScalarKernel lap{ScalarKernelKind::Laplacian, cfg.kernel_c};
  std::mt19937_64 rng = init_rng(seed);
  std::vector<Layer> layers;
  layers.push_back(make_layer(MatrixKernel::product_conv(lap, ones_blocks(2, d)),
                              AlgebraDescriptor::uniform_blocks(d / 4, d), cfg.n, cfg, rng));
  layers.push_back(make_layer(MatrixKernel::product_conv(lap, ones_blocks(4, d)),
                              AlgebraDescriptor::uniform_blocks(4, d), cfg.n, cfg, rng));
  DeepModel model(std::move(layers), train_x);
  DenseHead head = DenseHead::glorot(d * d, cfg.hidden, 10, rng);

  LossConfig loss;
  loss.kind = LossKind::CrossEntropy;
  loss.lambda1 = lambda1;
  loss.lambda2 = cfg.lambda2;
  loss.eta = cfg.eta;
  loss.squared_norm = cfg.squared_norm;

  MetricsLog log({"epoch", "train_ce", "train_acc", "test_acc", "reg_pf", "reg_norm", "total", "grad_norm"});
  TrainLog train_log = log_path.empty() ? TrainLog() : TrainLog(log_path);
  OptimizerState state = make_optimizer(cfg);
  Vector head_m = Vector::Zero(head.params().size());
  Vector head_v = head_m;
  const auto start = Clock::now();
  const std::size_t n = train_x.size();

  for (long epoch = 0;; ++epoch) {
    const std::vector<Matrix> feats = batch_forward(model, train_x);
    std::vector<Vector> flat, logits;
    for (const auto& f : feats) {
      flat.push_back(flatten_row_major(f));
      logits.push_back(dense_head_logits(head, flat.back()));
    }
    const CrossEntropyValue ce = loss_cross_entropy_grad(logits, train_y);
    Vector head_grad = Vector::Zero(head.params().size());
    std::vector<Matrix> adjoints;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const HeadGradient hg = dense_head_backward(head, flat[i], ce.adjoints[i]);
      head_grad += hg.grad.params();
      adjoints.push_back(unflatten_row_major(hg.input_adjoint, d, d));
      if (argmax(logits[i]) == train_y[i]) ++hits;
    }
    const ObjectiveGradient og = backprop(model, train_x, ce.value, adjoints, loss);
    const double grad_norm = std::sqrt(og.grads.norm() * og.grads.norm() + head_grad.squaredNorm());
    train_log.write(epoch, ce.value, og.terms.reg_pf, og.terms.reg_norm, og.terms.total(), grad_norm,
                    elapsed_ms(start));

    const bool capped = epoch >= cfg.max_epochs;
    if (capped || epoch % cfg.eval_every == 0) {
      log.add_row({static_cast<double>(epoch), ce.value, static_cast<double>(hits) / static_cast<double>(n),
                   accuracy(model, head, test_x, test_y), og.terms.reg_pf, og.terms.reg_norm, og.terms.total(),
                   grad_norm});
    }
    if (capped) {
      log.info["stop_reason"] = "epoch_cap";
      log.info["stop_epoch"] = epoch;
      break;
    }
    optimizer_step(state, model, og.grads);
    Vector hp = head.params();
    adam_update(hp, head_grad, head_m, head_v, state.step_count, cfg.lr, state.beta1, state.beta2, state.eps);
    head.set_params(hp);
  }
  log.info["lambda1"] = lambda1;
  log.info["train_images"] = static_cast<int>(n);
  log.info["test_images"] = static_cast<int>(test_count);
  return log;
}

std::vector<std::string> arms_for(const ExperimentConfig& cfg) {
  if (cfg.which == ExperimentKind::Autoencoder) return {"rkhm", "vvrkhs"};
  std::vector<std::string> arms;
  for (double l : cfg.lambda1) arms.push_back("lambda1_" + format_short(l));
  return arms;
}

Json summarize(const ExperimentConfig& cfg, const std::vector<RunRecord>& runs) {
  const std::vector<std::string> metrics =
      cfg.which == ExperimentKind::Mnist
          ? std::vector<std::string>{"train_acc", "test_acc", "train_ce"}
          : std::vector<std::string>{"gap", "test_opnorm", "train_opnorm", "train_loss"};
  Json config = config_to_json(cfg);
  config.erase("output_dir");
  Json s{{"experiment", experiment_name(cfg.which)}, {"config", config}};
  Json arms = Json::object();
  for (const auto& arm : arms_for(cfg)) {
    Json a{{"seeds", Json::array()}};
    std::map<std::string, std::vector<double>> finals;
    for (const auto& r : runs) {
      if (r.arm != arm) continue;
      a["seeds"].push_back(r.seed);
      if (r.log.info.contains("status") && r.log.info["status"] != "ok") continue;
      for (const auto& m : metrics) finals[m].push_back(r.log.final_value(m));
      if (r.log.info.contains("stop_epoch")) finals["stop_epoch"].push_back(r.log.info["stop_epoch"].get<double>());
    }
    Json fin = Json::object(), med = Json::object();
    for (const auto& [m, values] : finals) {
      fin[m] = values;
      med[m] = values.empty() ? Json(nullptr) : Json(median(values));
    }
    a["final"] = fin;
    a["median"] = med;
    arms[arm] = a;
  }
  s["arms"] = arms;

  // Per-seed comparison of the last arm against the first.
  const auto names = arms_for(cfg);
  if (names.size() >= 2) {
    const std::string key = cfg.which == ExperimentKind::Mnist ? "test_acc" : "gap";
    int wins = 0, compared = 0;
    for (const auto& r0 : runs) {
      if (r0.arm != names.front() || r0.log.info.value("status", "") != "ok") continue;
      for (const auto& r1 : runs) {
        if (r1.arm != names.back() || r1.seed != r0.seed || r1.log.info.value("status", "") != "ok") continue;
        const double a = r0.log.final_value(key), b = r1.log.final_value(key);
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        ++compared;
        const bool better = cfg.which == ExperimentKind::Mnist ? b > a : b < a;
        if (better) ++wins;
      }
    }
    s["comparison"] = Json{{"metric", key}, {"baseline", names.front()}, {"candidate", names.back()},
                           {"candidate_better", wins}, {"compared", compared}};
  }
  return s;
}

}  // namespace

ExperimentKind experiment_kind_from(const std::string& name) {
  if (name == "autoencoder") return ExperimentKind::Autoencoder;
  if (name == "benign") return ExperimentKind::Benign;
  if (name == "mnist") return ExperimentKind::Mnist;
  throw Error(ErrorCode::InvalidInput, "unknown experiment '" + name + "'");
}

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Autoencoder: return "autoencoder";
    case ExperimentKind::Benign: return "benign";
    case ExperimentKind::Mnist: return "mnist";
  }
  return "unknown";
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind which) {
  ExperimentConfig c;
  c.which = which;
  switch (which) {
    case ExperimentKind::Autoencoder:
      c.runs = 5;
      c.stop_loss = 0.05;
      break;
    case ExperimentKind::Benign:
      c.runs = 3;
      c.n = 200;
      c.max_epochs = 2000;
      c.eval_every = 50;
      c.lr = 3e-4;
      c.lambda1 = {0.0, 100.0};
      c.lambda2 = 0.01;
      break;
    case ExperimentKind::Mnist:
      c.runs = 5;
      c.n = 20;
      c.d = 28;
      c.max_epochs = 300;
      c.eval_every = 10;
      c.optimizer = OptimizerKind::Adam;
      c.lr = 1e-3;
      c.lambda1 = {0.0, 1.0};
      c.lambda2 = 0.001;
      c.init_block = 0.0;
      c.init_noise = 0.1;
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (runs < 1 || n < 1 || d < 1 || test_size < 0 || max_epochs < 0 || eval_every < 1) {
    throw Error(ErrorCode::InvalidInput, "experiment sizes must be positive");
  }
  if (!(lr > 0.0) || !(kernel_c > 0.0) || !(eta > 0.0) || lambda2 < 0.0 || init_noise < 0.0 || noise_std < 0.0) {
    throw Error(ErrorCode::InvalidInput, "experiment rates and weights must be positive");
  }
  for (double l : lambda1) {
    if (l < 0.0) throw Error(ErrorCode::InvalidInput, "lambda1 must be nonnegative");
  }
  if (lambda1.empty()) throw Error(ErrorCode::InvalidInput, "lambda1 needs at least one value");
  if (which == ExperimentKind::Autoencoder && d % 2 != 0) {
    throw Error(ErrorCode::InvalidInput, "autoencoder needs even d for its 2 x 2 blocks");
  }
  if (which == ExperimentKind::Mnist) {
    if (d != 28) throw Error(ErrorCode::InvalidInput, "mnist fixes d = 28");
    if (hidden < 1) throw Error(ErrorCode::InvalidInput, "hidden size must be positive");
  }
}

ExperimentConfig config_from_json(const Json& j, ExperimentKind which) {
  ExperimentConfig c = ExperimentConfig::defaults(which);
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "experiment config must be a JSON object");
  try {
    if (j.contains("experiment") && experiment_kind_from(j.at("experiment").get<std::string>()) != which) {
      throw Error(ErrorCode::InvalidInput, "config is for a different experiment");
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("runs")) c.runs = j.at("runs").get<int>();
    if (j.contains("n")) c.n = j.at("n").get<int>();
    if (j.contains("d")) c.d = j.at("d").get<int>();
    if (j.contains("test_size")) c.test_size = j.at("test_size").get<int>();
    if (j.contains("max_epochs")) c.max_epochs = j.at("max_epochs").get<long>();
    if (j.contains("stop_loss")) {
      c.stop_loss = j.at("stop_loss").is_null() ? std::nullopt : std::optional<double>(j.at("stop_loss").get<double>());
    }
    if (j.contains("eval_every")) c.eval_every = j.at("eval_every").get<long>();
    if (j.contains("optimizer")) {
      const auto name = j.at("optimizer").get<std::string>();
      if (name == "sgd") c.optimizer = OptimizerKind::SGD;
      else if (name == "adam") c.optimizer = OptimizerKind::Adam;
      else throw Error(ErrorCode::InvalidInput, "optimizer must be 'sgd' or 'adam'");
    }
    if (j.contains("lr")) c.lr = j.at("lr").get<double>();
    if (j.contains("kernel_c")) c.kernel_c = j.at("kernel_c").get<double>();
    if (j.contains("lambda1")) {
      const Json& l = j.at("lambda1");
      c.lambda1 = l.is_array() ? l.get<std::vector<double>>() : std::vector<double>{l.get<double>()};
    }
    if (j.contains("eta")) c.eta = j.at("eta").get<double>();
    if (j.contains("lambda2")) c.lambda2 = j.at("lambda2").get<double>();
    if (j.contains("squared_norm")) c.squared_norm = j.at("squared_norm").get<bool>();
    if (j.contains("init_block")) c.init_block = j.at("init_block").get<double>();
    if (j.contains("init_noise")) c.init_noise = j.at("init_noise").get<double>();
    if (j.contains("noise_std")) c.noise_std = j.at("noise_std").get<double>();
    if (j.contains("hidden")) c.hidden = j.at("hidden").get<int>();
    if (j.contains("mnist")) {
      const Json& m = j.at("mnist");
      if (m.contains("train_images")) c.mnist.train_images = m.at("train_images").get<std::string>();
      if (m.contains("train_labels")) c.mnist.train_labels = m.at("train_labels").get<std::string>();
      if (m.contains("test_images")) c.mnist.test_images = m.at("test_images").get<std::string>();
      if (m.contains("test_labels")) c.mnist.test_labels = m.at("test_labels").get<std::string>();
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("train_log")) c.train_log = j.at("train_log").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  return Json{{"experiment", experiment_name(c.which)},
              {"seed", c.seed},
              {"runs", c.runs},
              {"n", c.n},
              {"d", c.d},
              {"test_size", c.test_size},
              {"max_epochs", c.max_epochs},
              {"stop_loss", c.stop_loss ? Json(*c.stop_loss) : Json(nullptr)},
              {"eval_every", c.eval_every},
              {"optimizer", c.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
              {"lr", c.lr},
              {"kernel_c", c.kernel_c},
              {"lambda1", c.lambda1},
              {"eta", c.eta},
              {"lambda2", c.lambda2},
              {"squared_norm", c.squared_norm},
              {"init_block", c.init_block},
              {"init_noise", c.init_noise},
              {"noise_std", c.noise_std},
              {"hidden", c.hidden},
              {"mnist",
               {{"train_images", c.mnist.train_images},
                {"train_labels", c.mnist.train_labels},
                {"test_images", c.mnist.test_images},
                {"test_labels", c.mnist.test_labels}}},
              {"output_dir", c.output_dir},
              {"train_log", c.train_log}};
}

std::string run_stem(ExperimentKind kind, const std::string& arm, std::uint64_t seed) {
  return experiment_name(kind) + "_" + arm + "_seed" + std::to_string(seed);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);
  ExperimentResult result;
  const auto arms = arms_for(cfg);
  for (int r = 0; r < cfg.runs; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    for (std::size_t a = 0; a < arms.size(); ++a) {
      const std::string stem = run_stem(cfg.which, arms[a], seed);
      const std::string log_path = train_log_path(cfg, stem);
      const auto start = Clock::now();
      RunRecord rec{arms[a], seed, MetricsLog(), 0.0};
      try {
        switch (cfg.which) {
          case ExperimentKind::Autoencoder: rec.log = run_autoencoder_arm(cfg, arms[a], seed, log_path); break;
          case ExperimentKind::Benign: rec.log = run_benign_arm(cfg, cfg.lambda1[a], seed, log_path); break;
          case ExperimentKind::Mnist: rec.log = run_mnist_arm(cfg, cfg.lambda1[a], seed, log_path); break;
        }
        rec.log.info["status"] = "ok";
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFinite) throw;
        rec.log.info["status"] = "nonfinite";
        rec.log.info["diagnostic"] = e.what();
      }
      rec.log.info["arm"] = arms[a];
      rec.log.info["seed"] = seed;
      rec.runtime_s = elapsed_ms(start) / 1000.0;
      if (!cfg.output_dir.empty()) {
        emit_metrics(rec.log, (std::filesystem::path(cfg.output_dir) / (stem + ".csv")).string());
      }
      result.runs.push_back(std::move(rec));
    }
  }
  result.summary = summarize(cfg, result.runs);
  if (!cfg.output_dir.empty()) {
    const std::filesystem::path dir(cfg.output_dir);
    const std::string name = experiment_name(cfg.which);
    write_json_file((dir / (name + "_summary.json")).string(), result.summary);
    Json timing = Json::array();
    for (const auto& r : result.runs) timing.push_back(Json{{"arm", r.arm}, {"seed", r.seed}, {"runtime_s", r.runtime_s}});
    write_json_file((dir / (name + "_timing.json")).string(), timing);
  }
  return result;
}

}  // namespace rkhm
