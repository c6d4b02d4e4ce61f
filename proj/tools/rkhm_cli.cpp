// Command-line front end: gram, pf-norm, bound, train, experiment.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <random>

#include "rkhm/bounds.hpp"
#include "rkhm/experiments.hpp"
#include "rkhm/metrics.hpp"
#include "rkhm/pfnorm.hpp"
#include "rkhm/serialize.hpp"
#include "rkhm/training.hpp"

namespace fs = std::filesystem;
using namespace rkhm;

namespace {

std::vector<Matrix> matrices_from(const Json& j, int d) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidInput, "expected an array of matrices");
  std::vector<Matrix> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m, d, d));
  return out;
}

int infer_dim(const Json& points) {
  if (!points.is_array() || points.empty()) throw Error(ErrorCode::InvalidInput, "'points' must be a nonempty array");
  const Json& first = points.front();
  if (first.is_array() && !first.empty() && first.front().is_array()) return static_cast<int>(first.size());
  const auto size = static_cast<int>(first.size());
  int d = 1;
  while (d * d < size) ++d;
  if (d * d != size) throw Error(ErrorCode::ShapeMismatch, "point is not a square matrix");
  return d;
}

/// Inline object or a path to a JSON file.
Json inline_or_file(const Json& j, const fs::path& base) {
  if (j.is_string()) return read_json_file((base / j.get<std::string>()).string());
  return j;
}

void emit(const Json& j, const std::string& out_dir, const std::string& name) {
  std::cout << j.dump(2) << '\n';
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_json_file((fs::path(out_dir) / name).string(), j);
  }
}

LossConfig loss_from_json(const Json& j) {
  LossConfig cfg;
  if (j.contains("kind")) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "opnorm") cfg.kind = LossKind::OpNorm;
    else if (kind == "hs_mean") cfg.kind = LossKind::HsMean;
    else throw Error(ErrorCode::InvalidInput, "train supports loss kinds 'opnorm' and 'hs_mean'");
  }
  cfg.lambda1 = j.value("lambda1", cfg.lambda1);
  cfg.eta = j.value("eta", cfg.eta);
  cfg.lambda2 = j.value("lambda2", cfg.lambda2);
  cfg.squared_norm = j.value("squared_norm", cfg.squared_norm);
  cfg.validate();
  return cfg;
}

/// Random model anchored at the inputs: {"layers": [{"kernel", "coeff_desc"}], "init_block", "init_noise"}.
DeepModel model_from_spec(const Json& spec, const std::vector<Matrix>& anchors, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double block = spec.value("init_block", 0.0);
  const double noise = spec.value("init_noise", 0.1);
  std::normal_distribution<double> dist(0.0, noise > 0.0 ? noise : 1.0);
  std::vector<Layer> layers;
  for (const auto& l : spec.at("layers")) {
    MatrixKernel kernel = kernel_from_json(l.at("kernel"));
    const AlgebraDescriptor desc = descriptor_from_json(l.at("coeff_desc"));
    std::vector<AlgebraElement> coeffs;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      Vector p(static_cast<Eigen::Index>(desc.degrees_of_freedom()));
      for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = block + (noise > 0.0 ? dist(rng) : 0.0);
      coeffs.push_back(AlgebraElement::from_params(desc, p));
    }
    layers.push_back(Layer{std::move(kernel), desc, std::move(coeffs)});
  }
  return DeepModel(std::move(layers), anchors);
}

int cmd_gram(const std::string& config, const std::string& out) {
  const Json cfg = read_json_file(config);
  const fs::path base = fs::path(config).parent_path();
  const MatrixKernel k = kernel_from_json(inline_or_file(cfg.at("kernel"), base));
  const std::vector<Matrix> points = matrices_from(cfg.at("points"), infer_dim(cfg.at("points")));
  const GramMatrix g = cfg.value("dense", false) ? gram_dense(k, points) : gram(k, points);
  emit(gram_to_json(g), out, "gram.json");
  return 0;
}

int cmd_pf_norm(const std::string& g1_path, const std::string& gl_path, double eta, double lambda1,
                const std::string& out) {
  const GramMatrix g1 = gram_from_json(read_json_file(g1_path));
  const GramMatrix gl = gram_from_json(read_json_file(gl_path));
  emit(pf_report_to_json(pf_report(g1, gl, eta, lambda1)), out, "pf_norm.json");
  return 0;
}

int cmd_bound(const std::string& config, const std::string& out) {
  const Json cfg = read_json_file(config);
  const fs::path base = fs::path(config).parent_path();
  BoundInputs in;
  if (cfg.contains("model")) {
    const DeepModel model = model_from_json(inline_or_file(cfg.at("model"), base));
    const std::vector<Matrix> targets = matrices_from(cfg.at("targets"), model.dim());
    in = estimate_bound_inputs(model, targets, cfg.value("delta", 0.05), cfg.value("empirical", 0.0));
  } else {
    in = bound_inputs_from_json(cfg);
  }
  const BoundReport r = deep_bound(in);
  Json j{{"inputs", bound_inputs_to_json(in)}, {"report", bound_report_to_json(r)}};
  if (cfg.contains("d")) {
    j["vv_trace_factor"] = vv_trace_factor(in.trace_sum, cfg.at("d").get<int>());
  }
  emit(j, out, "bound.json");
  return 0;
}

int cmd_train(const std::string& config, std::uint64_t seed, const std::string& out) {
  const Json cfg = read_json_file(config);
  const fs::path base = fs::path(config).parent_path();
  const Json& jin = cfg.at("inputs");
  const int d = infer_dim(jin);
  const std::vector<Matrix> inputs = matrices_from(jin, d);
  const std::vector<Matrix> targets = matrices_from(cfg.at("targets"), d);
  DeepModel model = cfg.contains("model") ? model_from_json(inline_or_file(cfg.at("model"), base))
                                          : model_from_spec(cfg.at("model_spec"), inputs, seed);
  const LossConfig loss = loss_from_json(cfg.value("loss", Json::object()));
  const Json opt = cfg.value("optimizer", Json::object());
  const double lr = opt.value("lr", 1e-4);
  OptimizerState state = opt.value("kind", std::string("sgd")) == "adam" ? OptimizerState::adam(lr)
                                                                        : OptimizerState::sgd(lr);
  const long epochs = cfg.value("epochs", 100L);

  if (!out.empty()) fs::create_directories(out);
  TrainLog log = out.empty() ? TrainLog() : TrainLog((fs::path(out) / "train.csv").string());
  const auto start = std::chrono::steady_clock::now();
  ObjectiveTerms last;
  for (long epoch = 0; epoch <= epochs; ++epoch) {
    const ObjectiveGradient og = objective_grad(model, inputs, targets, loss);
    last = og.terms;
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    log.write(epoch, og.terms.data, og.terms.reg_pf, og.terms.reg_norm, og.terms.total(), og.grads.norm(), ms);
    if (epoch < epochs) optimizer_step(state, model, og.grads);
  }
  if (!out.empty()) write_json_file((fs::path(out) / "model.json").string(), model_to_json(model));
  std::cout << Json{{"epochs", epochs},
                    {"loss", last.data},
                    {"reg_pf", last.reg_pf},
                    {"reg_norm", last.reg_norm},
                    {"total", last.total()}}
                   .dump(2)
            << '\n';
  return 0;
}

int cmd_experiment(const std::string& which_name, const std::string& config, std::uint64_t seed,
                   const std::string& out, const std::vector<std::string>& overrides) {
  const ExperimentKind which = experiment_kind_from(which_name);
  Json j = config.empty() ? Json::object() : read_json_file(config);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidInput, "--set expects key=value");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    try {
      j[key] = Json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      j[key] = value;
    }
  }
  j["seed"] = seed;
  if (!out.empty()) j["output_dir"] = out;
  const ExperimentConfig cfg = config_from_json(j, which);
  const ExperimentResult result = run_experiment(cfg);
  std::cout << result.summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep RKHM toolkit"};
  app.require_subcommand(1);

  std::string config, out, g1, gl, which;
  std::uint64_t seed = 0;
  double eta = 0.01, lambda1 = 0.0;
  std::vector<std::string> overrides;

  auto* gram_cmd = app.add_subcommand("gram", "Assemble a Gram matrix from a kernel and points");
  gram_cmd->add_option("--config", config, "JSON with 'kernel' and 'points'")->required()->check(CLI::ExistingFile);
  gram_cmd->add_option("--out", out, "Output directory");

  auto* pf_cmd = app.add_subcommand("pf-norm", "Perron-Frobenius norm report for two Grams");
  pf_cmd->add_option("--g1", g1, "First-layer Gram JSON")->required()->check(CLI::ExistingFile);
  pf_cmd->add_option("--gl", gl, "Last-layer Gram JSON")->required()->check(CLI::ExistingFile);
  pf_cmd->add_option("--eta", eta, "Ridge inside the regularizer");
  pf_cmd->add_option("--lambda1", lambda1, "Regularizer weight");
  pf_cmd->add_option("--out", out, "Output directory");

  auto* bound_cmd = app.add_subcommand("bound", "Evaluate the generalization bound");
  bound_cmd->add_option("--config", config, "Bound inputs, or a model checkpoint with targets")
      ->required()
      ->check(CLI::ExistingFile);
  bound_cmd->add_option("--out", out, "Output directory");

  auto* train_cmd = app.add_subcommand("train", "Full-batch training of a deep model");
  train_cmd->add_option("--config", config, "Training JSON")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", seed, "Seed for random initialization");
  train_cmd->add_option("--out", out, "Output directory for train.csv and model.json");

  auto* exp_cmd = app.add_subcommand("experiment", "Run the autoencoder, benign or mnist experiment");
  exp_cmd->add_option("which", which, "autoencoder | benign | mnist")
      ->required()
      ->check(CLI::IsMember({"autoencoder", "benign", "mnist"}));
  exp_cmd->add_option("--config", config, "Experiment JSON overriding the defaults")->check(CLI::ExistingFile);
  exp_cmd->add_option("--seed", seed, "Base seed")->required();
  exp_cmd->add_option("--out", out, "Output directory");
  exp_cmd->add_option("--set", overrides, "Override a config key: key=value (value parsed as JSON)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gram_cmd) return cmd_gram(config, out);
    if (*pf_cmd) return cmd_pf_norm(g1, gl, eta, lambda1, out);
    if (*bound_cmd) return cmd_bound(config, out);
    if (*train_cmd) return cmd_train(config, seed, out);
    if (*exp_cmd) return cmd_experiment(which, config, seed, out, overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
