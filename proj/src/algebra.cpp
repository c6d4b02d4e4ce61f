#include "rkhm/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rkhm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PatternViolation: return "PatternViolation";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DescriptorMismatch: return "DescriptorMismatch";
    case ErrorCode::SingularElement: return "SingularElement";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// --- descriptor -------------------------------------------------------------

AlgebraDescriptor AlgebraDescriptor::full(int d) {
  if (d <= 0) throw Error(ErrorCode::InvalidInput, "dimension must be positive");
  return AlgebraDescriptor(AlgebraKind::Full, d, {d});
}

AlgebraDescriptor AlgebraDescriptor::block_diag(std::vector<int> sizes) {
  if (sizes.empty()) throw Error(ErrorCode::InvalidInput, "block list is empty");
  for (int s : sizes) {
    if (s <= 0) throw Error(ErrorCode::InvalidInput, "block sizes must be positive");
  }
  const int d = std::accumulate(sizes.begin(), sizes.end(), 0);
  return AlgebraDescriptor(AlgebraKind::BlockDiag, d, std::move(sizes));
}

AlgebraDescriptor AlgebraDescriptor::uniform_blocks(int block, int d) {
  if (block <= 0 || d <= 0 || d % block != 0) {
    throw Error(ErrorCode::InvalidInput, "block size must divide d");
  }
  return block_diag(std::vector<int>(static_cast<std::size_t>(d / block), block));
}

AlgebraDescriptor AlgebraDescriptor::diagonal(int d) { return uniform_blocks(1, d); }

AlgebraDescriptor AlgebraDescriptor::circulant(int d) {
  if (d <= 0) throw Error(ErrorCode::InvalidInput, "dimension must be positive");
  return AlgebraDescriptor(AlgebraKind::Circulant, d, {d});
}

std::vector<int> AlgebraDescriptor::offsets() const {
  std::vector<int> out(sizes_.size());
  int acc = 0;
  for (std::size_t b = 0; b < sizes_.size(); ++b) {
    out[b] = acc;
    acc += sizes_[b];
  }
  return out;
}

bool AlgebraDescriptor::in_pattern(int i, int j) const {
  if (kind_ != AlgebraKind::BlockDiag) return true;
  int start = 0;
  for (int s : sizes_) {
    if (i < start + s) return j >= start && j < start + s;
    start += s;
  }
  return false;
}

std::size_t AlgebraDescriptor::degrees_of_freedom() const {
  switch (kind_) {
    case AlgebraKind::Full: return static_cast<std::size_t>(d_) * static_cast<std::size_t>(d_);
    case AlgebraKind::Circulant: return static_cast<std::size_t>(d_);
    case AlgebraKind::BlockDiag: {
      std::size_t n = 0;
      for (int s : sizes_) n += static_cast<std::size_t>(s) * static_cast<std::size_t>(s);
      return n;
    }
  }
  return 0;
}

std::string AlgebraDescriptor::kind_name() const {
  switch (kind_) {
    case AlgebraKind::Full: return "full";
    case AlgebraKind::BlockDiag: return "block_diag";
    case AlgebraKind::Circulant: return "circulant";
  }
  return "unknown";
}

// --- element construction ---------------------------------------------------

namespace {

void require_square(const Matrix& m, int d) {
  if (m.rows() != d || m.cols() != d) {
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(d) + "x" +
                                              std::to_string(d) + " matrix, got " +
                                              std::to_string(m.rows()) + "x" +
                                              std::to_string(m.cols()));
  }
}

void require_same(const AlgebraElement& a, const AlgebraElement& b) {
  if (!(a.desc() == b.desc())) {
    throw Error(ErrorCode::DescriptorMismatch,
                a.desc().kind_name() + " vs " + b.desc().kind_name());
  }
}

std::vector<Matrix> split_blocks(const Matrix& dense, const AlgebraDescriptor& desc) {
  std::vector<Matrix> blocks;
  blocks.reserve(desc.sizes().size());
  const auto offs = desc.offsets();
  for (std::size_t b = 0; b < offs.size(); ++b) {
    blocks.emplace_back(dense.block(offs[b], offs[b], desc.sizes()[b], desc.sizes()[b]));
  }
  return blocks;
}

}  // namespace

AlgebraElement AlgebraElement::make(const AlgebraDescriptor& desc, const Matrix& entries) {
  const int d = desc.dim();
  require_square(entries, d);
  switch (desc.kind()) {
    case AlgebraKind::Full:
      return AlgebraElement(desc, std::vector<Matrix>{entries});
    case AlgebraKind::BlockDiag:
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          if (!desc.in_pattern(i, j) && entries(i, j) != 0.0) {
            throw Error(ErrorCode::PatternViolation,
                        "nonzero off-block entry (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
          }
        }
      }
      return AlgebraElement(desc, split_blocks(entries, desc));
    case AlgebraKind::Circulant: {
      Vector row = entries.row(0).transpose();
      for (int i = 1; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          if (entries(i, j) != row((j - i + d) % d)) {
            throw Error(ErrorCode::PatternViolation,
                        "entry (" + std::to_string(i) + "," + std::to_string(j) +
                            ") breaks circulant structure");
          }
        }
      }
      return AlgebraElement(desc, std::move(row));
    }
  }
  throw Error(ErrorCode::InvalidInput, "unknown algebra kind");
}

AlgebraElement AlgebraElement::circulant(const Vector& first_row) {
  return AlgebraElement(AlgebraDescriptor::circulant(static_cast<int>(first_row.size())),
                        first_row);
}

AlgebraElement AlgebraElement::identity(const AlgebraDescriptor& desc) {
  return project_onto(Matrix::Identity(desc.dim(), desc.dim()), desc);
}

AlgebraElement AlgebraElement::zero(const AlgebraDescriptor& desc) {
  return project_onto(Matrix::Zero(desc.dim(), desc.dim()), desc);
}

AlgebraElement make_element(const AlgebraDescriptor& desc, const Matrix& entries) {
  return AlgebraElement::make(desc, entries);
}

Matrix AlgebraElement::dense() const {
  const int d = dim();
  if (const auto* row = std::get_if<Vector>(&storage_)) {
    Matrix out(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) out(i, j) = (*row)((j - i + d) % d);
    }
    return out;
  }
  const auto& blocks = std::get<std::vector<Matrix>>(storage_);
  if (blocks.size() == 1) return blocks.front();
  Matrix out = Matrix::Zero(d, d);
  const auto offs = desc_.offsets();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    out.block(offs[b], offs[b], blocks[b].rows(), blocks[b].cols()) = blocks[b];
  }
  return out;
}

double AlgebraElement::operator()(int i, int j) const {
  const int d = dim();
  if (const auto* row = std::get_if<Vector>(&storage_)) return (*row)((j - i + d) % d);
  const auto& blocks = std::get<std::vector<Matrix>>(storage_);
  const auto offs = desc_.offsets();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const int s = desc_.sizes()[b];
    if (i < offs[b] + s) {
      if (j < offs[b] || j >= offs[b] + s) return 0.0;
      return blocks[b](i - offs[b], j - offs[b]);
    }
  }
  return 0.0;
}

const std::vector<Matrix>& AlgebraElement::blocks() const {
  if (const auto* b = std::get_if<std::vector<Matrix>>(&storage_)) return *b;
  throw Error(ErrorCode::DescriptorMismatch, "circulant element has no block storage");
}

const Vector& AlgebraElement::first_row() const {
  if (const auto* r = std::get_if<Vector>(&storage_)) return *r;
  throw Error(ErrorCode::DescriptorMismatch, "element is not circulant");
}

Vector AlgebraElement::params() const {
  if (const auto* row = std::get_if<Vector>(&storage_)) return *row;
  Vector out(static_cast<Eigen::Index>(desc_.degrees_of_freedom()));
  Eigen::Index k = 0;
  for (const auto& blk : std::get<std::vector<Matrix>>(storage_)) {
    for (Eigen::Index i = 0; i < blk.rows(); ++i) {
      for (Eigen::Index j = 0; j < blk.cols(); ++j) out(k++) = blk(i, j);
    }
  }
  return out;
}

AlgebraElement AlgebraElement::from_params(const AlgebraDescriptor& desc, const Vector& params) {
  if (params.size() != static_cast<Eigen::Index>(desc.degrees_of_freedom())) {
    throw Error(ErrorCode::ShapeMismatch, "parameter count does not match descriptor");
  }
  if (desc.kind() == AlgebraKind::Circulant) return AlgebraElement(desc, params);
  std::vector<Matrix> blocks;
  Eigen::Index k = 0;
  for (int s : desc.sizes()) {
    Matrix blk(s, s);
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) blk(i, j) = params(k++);
    }
    blocks.push_back(std::move(blk));
  }
  return AlgebraElement(desc, std::move(blocks));
}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& other) const {
  require_same(*this, other);
  if (const auto* row = std::get_if<Vector>(&storage_)) {
    return AlgebraElement(desc_, Vector(*row + other.first_row()));
  }
  std::vector<Matrix> out = blocks();
  for (std::size_t b = 0; b < out.size(); ++b) out[b] += other.blocks()[b];
  return AlgebraElement(desc_, std::move(out));
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& other) const {
  return *this + other * -1.0;
}

AlgebraElement AlgebraElement::operator*(double s) const {
  if (const auto* row = std::get_if<Vector>(&storage_)) {
    return AlgebraElement(desc_, Vector(*row * s));
  }
  std::vector<Matrix> out = blocks();
  for (auto& b : out) b *= s;
  return AlgebraElement(desc_, std::move(out));
}

// --- algebra operations -----------------------------------------------------

Vector circular_convolution(const Vector& v, const Vector& w) {
  const Eigen::Index d = v.size();
  Vector out = Vector::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) acc += v(k) * w((j - k + d) % d);
    out(j) = acc;
  }
  return out;
}

AlgebraElement mul(const AlgebraElement& a, const AlgebraElement& b) {
  require_same(a, b);
  if (a.desc().kind() == AlgebraKind::Circulant) {
    return AlgebraElement(a.desc(), circular_convolution(a.first_row(), b.first_row()));
  }
  std::vector<Matrix> out;
  out.reserve(a.blocks().size());
  for (std::size_t k = 0; k < a.blocks().size(); ++k) {
    out.emplace_back(a.blocks()[k] * b.blocks()[k]);
  }
  return AlgebraElement(a.desc(), std::move(out));
}

AlgebraElement adjoint(const AlgebraElement& a) {
  if (a.desc().kind() == AlgebraKind::Circulant) {
    const Vector& v = a.first_row();
    const Eigen::Index d = v.size();
    Vector w(d);
    for (Eigen::Index k = 0; k < d; ++k) w(k) = v((d - k) % d);
    return AlgebraElement(a.desc(), std::move(w));
  }
  std::vector<Matrix> out;
  out.reserve(a.blocks().size());
  for (const auto& blk : a.blocks()) out.emplace_back(blk.transpose());
  return AlgebraElement(a.desc(), std::move(out));
}

double trace(const AlgebraElement& a) {
  if (a.desc().kind() == AlgebraKind::Circulant) return a.dim() * a.first_row()(0);
  double t = 0.0;
  for (const auto& blk : a.blocks()) t += blk.trace();
  return t;
}

namespace {

double block_op_norm(const Matrix& m) {
  const Matrix gram = m.transpose() * m;
  const double top = symmetric_eigen(gram).eigenvalues(0);
  return std::sqrt(std::max(top, 0.0));
}

Matrix apply_spectral(const Matrix& sym, PsdMode mode) {
  const SpectralDecomposition sd = symmetric_eigen(sym);
  const Eigen::Index n = sd.eigenvalues.size();
  const double top = sd.eigenvalues(0);
  const double bottom = sd.eigenvalues(n - 1);
  if (mode == PsdMode::Inv || mode == PsdMode::InvSqrt) {
    if (!(bottom > kSingularityThreshold * std::abs(top)) || top <= 0.0) {
      throw Error(ErrorCode::SingularElement,
                  "smallest eigenvalue " + std::to_string(bottom) + " below threshold");
    }
  }
  Vector f(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lam = sd.eigenvalues(k);
    switch (mode) {
      case PsdMode::Abs:
      case PsdMode::Sqrt: f(k) = std::sqrt(std::max(lam, 0.0)); break;
      case PsdMode::Inv: f(k) = 1.0 / lam; break;
      case PsdMode::InvSqrt: f(k) = 1.0 / std::sqrt(lam); break;
    }
  }
  return sd.eigenvectors * f.asDiagonal() * sd.eigenvectors.transpose();
}

}  // namespace

double op_norm(const AlgebraElement& a) {
  if (a.desc().kind() == AlgebraKind::Circulant) return block_op_norm(a.dense());
  double best = 0.0;
  for (const auto& blk : a.blocks()) best = std::max(best, block_op_norm(blk));
  return best;
}

double hs_norm(const AlgebraElement& a) {
  if (a.desc().kind() == AlgebraKind::Circulant) {
    return std::sqrt(static_cast<double>(a.dim())) * a.first_row().norm();
  }
  double sq = 0.0;
  for (const auto& blk : a.blocks()) sq += blk.squaredNorm();
  return std::sqrt(sq);
}

AlgebraElement psd_calculus(const AlgebraElement& a, PsdMode mode) {
  const bool need_sym = mode != PsdMode::Abs;
  auto prepare = [&](const Matrix& m) -> Matrix {
    if (mode == PsdMode::Abs) return m.transpose() * m;
    if (need_sym && !is_symmetric(m)) throw Error(ErrorCode::NotSymmetric, "element is not symmetric");
    return m;
  };
  if (a.desc().kind() == AlgebraKind::Circulant) {
    const Matrix out = apply_spectral(prepare(a.dense()), mode);
    return project_onto(out, a.desc());
  }
  std::vector<Matrix> out;
  out.reserve(a.blocks().size());
  for (const auto& blk : a.blocks()) out.emplace_back(apply_spectral(prepare(blk), mode));
  return AlgebraElement(a.desc(), std::move(out));
}

Matrix project_dense(const Matrix& dense, const AlgebraDescriptor& desc) {
  return project_onto(dense, desc).dense();
}

AlgebraElement project_onto(const Matrix& dense, const AlgebraDescriptor& desc) {
  const int d = desc.dim();
  require_square(dense, d);
  switch (desc.kind()) {
    case AlgebraKind::Full:
      return AlgebraElement(desc, std::vector<Matrix>{dense});
    case AlgebraKind::BlockDiag:
      return AlgebraElement(desc, split_blocks(dense, desc));
    case AlgebraKind::Circulant: {
      Vector row = Vector::Zero(d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) row((j - i + d) % d) += dense(i, j);
      }
      row /= static_cast<double>(d);
      return AlgebraElement(desc, std::move(row));
    }
  }
  throw Error(ErrorCode::InvalidInput, "unknown algebra kind");
}

bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + scale);
}

bool is_psd(const AlgebraElement& a, double tol) {
  const Matrix m = a.dense();
  if (!is_symmetric(m)) throw Error(ErrorCode::NotSymmetric, "is_psd needs a symmetric element");
  const SpectralDecomposition sd = symmetric_eigen(m);
  return sd.eigenvalues(sd.eigenvalues.size() - 1) >= -tol;
}

}  // namespace rkhm
