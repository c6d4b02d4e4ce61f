#pragma once

// Structured matrix C*-subalgebras of R^{d x d}: full matrices, block-diagonal
// matrices with a fixed block partition, and circulant matrices. Elements are
// immutable values; every operation returns a new element.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "rkhm/error.hpp"
#include "rkhm/spectral.hpp"

namespace rkhm {

enum class AlgebraKind { Full, BlockDiag, Circulant };

class AlgebraDescriptor {
 public:
  static AlgebraDescriptor full(int d);
  static AlgebraDescriptor block_diag(std::vector<int> sizes);
  /// d / block equal blocks; d must be divisible by block.
  static AlgebraDescriptor uniform_blocks(int block, int d);
  /// Block((1,...,1), d).
  static AlgebraDescriptor diagonal(int d);
  static AlgebraDescriptor circulant(int d);

  AlgebraKind kind() const { return kind_; }
  int dim() const { return d_; }
  /// Block sizes for BlockDiag; {d} for Full and Circulant.
  const std::vector<int>& sizes() const { return sizes_; }
  /// Start offset of each block (BlockDiag only meaningful).
  std::vector<int> offsets() const;

  /// True when entry (i, j) may be nonzero in this subalgebra.
  bool in_pattern(int i, int j) const;
  /// Number of free real parameters.
  std::size_t degrees_of_freedom() const;

  std::string kind_name() const;

  friend bool operator==(const AlgebraDescriptor&, const AlgebraDescriptor&) = default;

 private:
  AlgebraDescriptor(AlgebraKind kind, int d, std::vector<int> sizes)
      : kind_(kind), d_(d), sizes_(std::move(sizes)) {}

  AlgebraKind kind_;
  int d_;
  std::vector<int> sizes_;
};

enum class PsdMode { Abs, Sqrt, Inv, InvSqrt };

class AlgebraElement {
 public:
  /// Validating constructor: rejects shape errors and any nonzero entry
  /// outside the descriptor's pattern (exact comparison).
  static AlgebraElement make(const AlgebraDescriptor& desc, const Matrix& entries);
  /// Circulant element from its first row.
  static AlgebraElement circulant(const Vector& first_row);
  static AlgebraElement identity(const AlgebraDescriptor& desc);
  static AlgebraElement zero(const AlgebraDescriptor& desc);

  const AlgebraDescriptor& desc() const { return desc_; }
  int dim() const { return desc_.dim(); }

  /// Dense d x d materialization.
  Matrix dense() const;
  double operator()(int i, int j) const;

  /// Blocks for BlockDiag storage (one block of size d for Full).
  const std::vector<Matrix>& blocks() const;
  /// First row for Circulant storage.
  const Vector& first_row() const;

  /// Free parameters in storage order: concatenated row-major blocks, or the
  /// circulant first row.
  Vector params() const;
  static AlgebraElement from_params(const AlgebraDescriptor& desc, const Vector& params);

  AlgebraElement operator+(const AlgebraElement& other) const;
  AlgebraElement operator-(const AlgebraElement& other) const;
  AlgebraElement operator*(double s) const;

 private:
  using Storage = std::variant<std::vector<Matrix>, Vector>;
  AlgebraElement(AlgebraDescriptor desc, Storage storage)
      : desc_(std::move(desc)), storage_(std::move(storage)) {}

  friend AlgebraElement mul(const AlgebraElement&, const AlgebraElement&);
  friend AlgebraElement adjoint(const AlgebraElement&);
  friend AlgebraElement project_onto(const Matrix&, const AlgebraDescriptor&);
  friend AlgebraElement psd_calculus(const AlgebraElement&, PsdMode);

  AlgebraDescriptor desc_;
  Storage storage_;
};

inline AlgebraElement operator*(double s, const AlgebraElement& a) { return a * s; }

AlgebraElement make_element(const AlgebraDescriptor& desc, const Matrix& entries);

/// Product within the subalgebra; blockwise for BlockDiag, circular
/// convolution of first rows for Circulant.
AlgebraElement mul(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement adjoint(const AlgebraElement& a);
double trace(const AlgebraElement& a);

/// Largest singular value.
double op_norm(const AlgebraElement& a);
/// Frobenius norm.
double hs_norm(const AlgebraElement& a);

/// Functional calculus on the spectrum. Abs accepts any element and returns
/// (a^T a)^{1/2}; the other modes require a symmetric element, and Inv/InvSqrt
/// additionally require the smallest eigenvalue to exceed 1e-12 times the
/// largest.
AlgebraElement psd_calculus(const AlgebraElement& a, PsdMode mode);

/// Hilbert-Schmidt orthogonal projection of a dense matrix onto the subalgebra.
AlgebraElement project_onto(const Matrix& dense, const AlgebraDescriptor& desc);

bool is_psd(const AlgebraElement& a, double tol);

/// Zeroes entries outside the pattern / averages wrapped diagonals, on a dense
/// matrix. Same map as project_onto without building an element.
Matrix project_dense(const Matrix& dense, const AlgebraDescriptor& desc);

/// max |a - a^T| <= tol * (1 + max |a|).
bool is_symmetric(const Matrix& a, double tol = 1e-10);

inline constexpr double kSingularityThreshold = 1e-12;

/// Circular convolution (v * w)[j] = sum_k v[k] w[(j - k) mod d].
Vector circular_convolution(const Vector& v, const Vector& w);

}  // namespace rkhm
