#pragma once

// Synthetic data for the autoencoder and benign-overfitting experiments, and
// an IDX reader for MNIST. Every generator draws from std::mt19937_64 seeded
// with the given seed, so equal seeds give bitwise-equal data on one platform.

#include <cstdint>
#include <string>
#include <vector>

#include "rkhm/algebra.hpp"

namespace rkhm {

struct AutoencoderData {
  Matrix mixing;               // d^2 x latent, entries N(0, 0.1)
  std::vector<Matrix> train;   // targets equal inputs
  std::vector<Matrix> test;
};

/// x = (a z)^2 + eps elementwise with a and z ~ N(0, 0.1), eps ~ N(0, noise_std),
/// reshaped row-major to d x d. The test set reuses a with fresh z and eps.
AutoencoderData gen_autoencoder_data(std::uint64_t seed, int n = 10, int d = 10, int test_n = 0,
                                     int latent = 10, double noise_std = 1e-3);

struct RegressionData {
  std::vector<Matrix> train_x, train_y;
  std::vector<Matrix> test_x, test_y;
};

/// Diagonal x with entries N(0, 0.1) and y = x^2 + eps, eps diagonal N(0, noise_std).
RegressionData gen_benign_data(std::uint64_t seed, int n = 1000, int d = 10, int test_n = 0,
                               double noise_std = 1e-3);

struct LabeledImages {
  std::vector<Matrix> images;  // rows x cols, pixels scaled to [0, 1]
  std::vector<int> labels;
};

/// Big-endian IDX pair: images magic 2051 (count, rows, cols), labels magic
/// 2049 (count).
LabeledImages load_mnist_idx(const std::string& images_path, const std::string& labels_path);

/// Writes an IDX pair; pixels are rounded from [0, 1] back to bytes.
void write_mnist_idx(const std::string& images_path, const std::string& labels_path,
                     const LabeledImages& data);

/// Indices of a class-stratified random subset of size total: class counts
/// differ by at most one. Classes are labels 0..num_classes-1.
std::vector<std::size_t> stratified_subset(const std::vector<int>& labels, int total, int num_classes,
                                           std::uint64_t seed);

}  // namespace rkhm
