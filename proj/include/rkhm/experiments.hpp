#pragma once

// Runners for the three experiments: autoencoder (operator-norm RKHM vs.
// Hilbert-Schmidt vvRKHS), benign overfitting (with and without the
// Perron-Frobenius regularizer) and MNIST classification with a dense head.
// Each run is sequential and deterministic given its seed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rkhm/metrics.hpp"
#include "rkhm/training.hpp"

namespace rkhm {

enum class ExperimentKind { Autoencoder, Benign, Mnist };

ExperimentKind experiment_kind_from(const std::string& name);
std::string experiment_name(ExperimentKind kind);

struct MnistPaths {
  std::string train_images = "data/mnist/train-images-idx3-ubyte";
  std::string train_labels = "data/mnist/train-labels-idx1-ubyte";
  std::string test_images = "data/mnist/test-images-idx3-ubyte";
  std::string test_labels = "data/mnist/test-labels-idx1-ubyte";
};

struct ExperimentConfig {
  ExperimentKind which = ExperimentKind::Autoencoder;
  std::uint64_t seed = 0;
  int runs = 1;                     // seeds seed, seed + 1, ...
  int n = 10;
  int d = 10;
  int test_size = 1000;
  long max_epochs = 50000;
  std::optional<double> stop_loss;  // stop once the arm's training loss reaches this
  long eval_every = 100;
  OptimizerKind optimizer = OptimizerKind::SGD;
  double lr = 1e-4;
  double kernel_c = 1e-3;
  std::vector<double> lambda1{0.0};  // one arm per value (benign, mnist)
  double eta = 0.01;
  double lambda2 = 0.0;
  bool squared_norm = true;
  double init_block = 0.1;  // constant added on the subalgebra pattern
  double init_noise = 0.05;
  double noise_std = 1e-3;  // data noise
  int hidden = 64;          // dense head width
  MnistPaths mnist;
  std::string output_dir;   // empty: keep results in memory only
  bool train_log = true;

  static ExperimentConfig defaults(ExperimentKind which);
  void validate() const;
};

/// Starts from defaults(which) and overrides every key present in j.
ExperimentConfig config_from_json(const Json& j, ExperimentKind which);
Json config_to_json(const ExperimentConfig& cfg);

struct RunRecord {
  std::string arm;
  std::uint64_t seed = 0;
  MetricsLog log;
  double runtime_s = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  Json summary;  // deterministic: config echo and per-arm medians
};

/// Runs every seed and arm. When output_dir is set, writes one metrics CSV
/// (plus summary JSON) and one training log per run, then
/// <name>_summary.json and <name>_timing.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Stable file stem for a run, e.g. "benign_lambda1_100_seed3".
std::string run_stem(ExperimentKind kind, const std::string& arm, std::uint64_t seed);

}  // namespace rkhm
