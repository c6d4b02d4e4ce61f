#include "rkhm/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace rkhm {

namespace {

Matrix sample_autoencoder(std::mt19937_64& rng, const Matrix& mixing, int d, double noise_std) {
  std::normal_distribution<double> latent(0.0, 0.1);
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);
  Vector z(mixing.cols());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = latent(rng);
  const Vector w = mixing * z;
  Matrix x(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      const double v = w(r * d + c);
      x(r, c) = v * v + (noise_std > 0.0 ? noise(rng) : 0.0);
    }
  }
  return x;
}

void sample_benign(std::mt19937_64& rng, int d, double noise_std, Matrix& x, Matrix& y) {
  std::normal_distribution<double> entry(0.0, 0.1);
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);
  x = Matrix::Zero(d, d);
  y = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    x(k, k) = entry(rng);
    y(k, k) = x(k, k) * x(k, k) + (noise_std > 0.0 ? noise(rng) : 0.0);
  }
}

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (in.gcount() != 4) throw Error(ErrorCode::TruncatedFile, path + ": header is truncated");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>((v >> 24) & 0xff), static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 8) & 0xff), static_cast<char>(v & 0xff)};
  out.write(b.data(), 4);
}

std::vector<unsigned char> read_payload(std::istream& in, std::size_t bytes, const std::string& path) {
  std::vector<unsigned char> buf(bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw Error(ErrorCode::TruncatedFile, path + ": payload shorter than header count");
  }
  return buf;
}

}  // namespace

AutoencoderData gen_autoencoder_data(std::uint64_t seed, int n, int d, int test_n, int latent,
                                     double noise_std) {
  if (n < 1 || d < 1 || test_n < 0 || latent < 1 || noise_std < 0.0) {
    throw Error(ErrorCode::InvalidInput, "autoencoder data sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> entry(0.0, 0.1);
  AutoencoderData out;
  out.mixing.resize(static_cast<Eigen::Index>(d) * d, latent);
  for (Eigen::Index i = 0; i < out.mixing.rows(); ++i) {
    for (Eigen::Index k = 0; k < latent; ++k) out.mixing(i, k) = entry(rng);
  }
  for (int i = 0; i < n; ++i) out.train.push_back(sample_autoencoder(rng, out.mixing, d, noise_std));
  for (int i = 0; i < test_n; ++i) out.test.push_back(sample_autoencoder(rng, out.mixing, d, noise_std));
  return out;
}

RegressionData gen_benign_data(std::uint64_t seed, int n, int d, int test_n, double noise_std) {
  if (n < 1 || d < 1 || test_n < 0 || noise_std < 0.0) {
    throw Error(ErrorCode::InvalidInput, "benign data sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  RegressionData out;
  Matrix x, y;
  for (int i = 0; i < n; ++i) {
    sample_benign(rng, d, noise_std, x, y);
    out.train_x.push_back(x);
    out.train_y.push_back(y);
  }
  for (int i = 0; i < test_n; ++i) {
    sample_benign(rng, d, noise_std, x, y);
    out.test_x.push_back(x);
    out.test_y.push_back(y);
  }
  return out;
}

LabeledImages load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw Error(ErrorCode::IoError, "cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw Error(ErrorCode::IoError, "cannot open " + labels_path);

  if (read_be32(img, images_path) != 2051) throw Error(ErrorCode::BadMagic, images_path + ": magic is not 2051");
  const std::uint32_t count = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);
  if (read_be32(lab, labels_path) != 2049) throw Error(ErrorCode::BadMagic, labels_path + ": magic is not 2049");
  const std::uint32_t label_count = read_be32(lab, labels_path);
  if (label_count != count) throw Error(ErrorCode::DimMismatch, "image and label counts differ");
  if (rows == 0 || cols == 0) throw Error(ErrorCode::DimMismatch, images_path + ": zero image dimension");

  const std::size_t pixels = std::size_t{rows} * cols;
  const auto raw = read_payload(img, pixels * count, images_path);
  const auto raw_labels = read_payload(lab, count, labels_path);

  LabeledImages out;
  out.images.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Matrix m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = raw[i * pixels + r * cols + c] / 255.0;
    }
    out.images.push_back(std::move(m));
    out.labels.push_back(raw_labels[i]);
  }
  return out;
}

void write_mnist_idx(const std::string& images_path, const std::string& labels_path,
                     const LabeledImages& data) {
  if (data.images.size() != data.labels.size() || data.images.empty()) {
    throw Error(ErrorCode::DimMismatch, "need matching, nonempty images and labels");
  }
  const auto rows = static_cast<std::uint32_t>(data.images.front().rows());
  const auto cols = static_cast<std::uint32_t>(data.images.front().cols());
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw Error(ErrorCode::IoError, "cannot write IDX files");
  write_be32(img, 2051);
  write_be32(img, static_cast<std::uint32_t>(data.images.size()));
  write_be32(img, rows);
  write_be32(img, cols);
  write_be32(lab, 2049);
  write_be32(lab, static_cast<std::uint32_t>(data.labels.size()));
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const Matrix& m = data.images[i];
    if (m.rows() != rows || m.cols() != cols) throw Error(ErrorCode::DimMismatch, "images differ in size");
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) {
        const double v = std::clamp(m(r, c), 0.0, 1.0);
        img.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
      }
    }
    lab.put(static_cast<char>(static_cast<unsigned char>(data.labels[i])));
  }
  if (!img || !lab) throw Error(ErrorCode::IoError, "IDX write failed");
}

std::vector<std::size_t> stratified_subset(const std::vector<int>& labels, int total, int num_classes,
                                           std::uint64_t seed) {
  if (total < 0 || num_classes < 1) throw Error(ErrorCode::InvalidInput, "bad stratified subset sizes");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw Error(ErrorCode::IndexOutOfRange, "label out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<int> class_order(static_cast<std::size_t>(num_classes));
  std::iota(class_order.begin(), class_order.end(), 0);
  std::shuffle(class_order.begin(), class_order.end(), rng);

  const int base = total / num_classes;
  const int extra = total % num_classes;
  std::vector<std::size_t> out;
  for (int rank = 0; rank < num_classes; ++rank) {
    auto& pool = by_class[static_cast<std::size_t>(class_order[static_cast<std::size_t>(rank)])];
    const auto want = static_cast<std::size_t>(base + (rank < extra ? 1 : 0));
    if (pool.size() < want) throw Error(ErrorCode::InvalidInput, "not enough samples in a class");
    std::shuffle(pool.begin(), pool.end(), rng);
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rkhm
