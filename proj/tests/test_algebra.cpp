#include <doctest.h>

#include <cmath>

#include <Eigen/SVD>

#include "rkhm/algebra.hpp"
#include "test_util.hpp"

using namespace rkhm;
using rkhm::testing::max_abs;

namespace {

double svd_top(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

bool off_pattern_zero(const Matrix& m, const AlgebraDescriptor& desc) {
  for (int i = 0; i < desc.dim(); ++i) {
    for (int j = 0; j < desc.dim(); ++j) {
      if (!desc.in_pattern(i, j) && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("jacobi matches the self-adjoint solver and reconstructs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + trial % 12;
      const Matrix a = testing::random_matrix(rng, n, n);
      const Matrix sym = a + a.transpose();
      const SpectralDecomposition sd = jacobi_eigen(sym);
      Eigen::SelfAdjointEigenSolver<Matrix> oracle(sym);
      Vector expected = oracle.eigenvalues().reverse();
      CHECK(max_abs(sd.eigenvalues - expected) <= 1e-10 * (1.0 + max_abs(expected)));
      CHECK((sd.reconstruct() - sym).norm() <= 1e-10 * (1.0 + sym.norm()));
      CHECK(max_abs(sd.eigenvectors.transpose() * sd.eigenvectors - Matrix::Identity(n, n)) < 1e-12);
      for (Eigen::Index k = 0; k + 1 < sd.eigenvalues.size(); ++k) {
        CHECK(sd.eigenvalues(k) >= sd.eigenvalues(k + 1));
      }
    }
  }

  TEST_CASE("eigenvector sign convention: first nonzero component positive") {
    std::mt19937_64 rng(12);
    const Matrix s = testing::random_spd(rng, 6);
    for (const auto& sd : {jacobi_eigen(s), symmetric_eigen(s)}) {
      for (Eigen::Index k = 0; k < 6; ++k) {
        const Vector col = sd.eigenvectors.col(k);
        for (Eigen::Index i = 0; i < 6; ++i) {
          if (std::abs(col(i)) > 1e-14) {
            CHECK(col(i) > 0.0);
            break;
          }
        }
      }
    }
  }

  TEST_CASE("large matrices take the tridiagonal path with the same conventions") {
    std::mt19937_64 rng(13);
    const Matrix s = testing::random_spd(rng, 80);
    const SpectralDecomposition sd = symmetric_eigen(s);
    CHECK((sd.reconstruct() - s).norm() <= 1e-10 * (1.0 + s.norm()));
    CHECK(sd.eigenvalues(0) >= sd.eigenvalues(79));
  }

  TEST_CASE("diagonal input with ties is handled deterministically") {
    Matrix m = Matrix::Identity(4, 4);
    const SpectralDecomposition a = jacobi_eigen(m);
    const SpectralDecomposition b = jacobi_eigen(m);
    CHECK(a.eigenvectors == b.eigenvectors);
    CHECK(a.eigenvalues == Vector::Ones(4));
  }
}

TEST_SUITE("algebra") {
  TEST_CASE("descriptor invariants") {
    const auto bd = AlgebraDescriptor::block_diag({2, 3});
    CHECK(bd.dim() == 5);
    CHECK(bd.in_pattern(1, 0));
    CHECK_FALSE(bd.in_pattern(1, 2));
    CHECK(bd.degrees_of_freedom() == 13);
    CHECK(AlgebraDescriptor::diagonal(3) == AlgebraDescriptor::block_diag({1, 1, 1}));
    CHECK_THROWS_AS(AlgebraDescriptor::uniform_blocks(3, 10), Error);
    CHECK_THROWS_AS(AlgebraDescriptor::block_diag({2, 0}), Error);
  }

  TEST_CASE("make_element") {
    const AlgebraElement id = make_element(AlgebraDescriptor::full(2), Matrix::Identity(2, 2));
    CHECK(id.dense() == Matrix::Identity(2, 2));

    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = 0.5;
    try {
      make_element(AlgebraDescriptor::diagonal(2), bad);
      FAIL("expected PatternViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PatternViolation);
    }
    try {
      make_element(AlgebraDescriptor::full(3), Matrix::Identity(2, 2));
      FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ShapeMismatch);
    }

    // Circulant with first row [1, 2, 3]: entry(i, j) = v[(j - i) mod 3].
    const Vector v = (Vector(3) << 1, 2, 3).finished();
    Matrix c(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) c(i, j) = v((j - i + 3) % 3);
    }
    const AlgebraElement circ = make_element(AlgebraDescriptor::circulant(3), c);
    CHECK(circ.first_row() == v);
    CHECK(circ.dense() == c);
    c(2, 2) = 7.0;
    CHECK_THROWS_AS(make_element(AlgebraDescriptor::circulant(3), c), Error);
  }

  TEST_CASE("mul: identity, circulant convolution, blockwise") {
    std::mt19937_64 rng(21);
    for (const auto& desc : {AlgebraDescriptor::full(4), AlgebraDescriptor::block_diag({1, 3}),
                             AlgebraDescriptor::circulant(4)}) {
      const AlgebraElement a = testing::random_element(rng, desc);
      CHECK(max_abs(mul(AlgebraElement::identity(desc), a).dense() - a.dense()) == 0.0);
    }

    // Direct oracle: (v * w)[j] = sum_k v[k] w[(j - k) mod d], written out independently.
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 2 + trial % 7;
      const Vector v = testing::random_matrix(rng, d, 1);
      const Vector w = testing::random_matrix(rng, d, 1);
      Vector conv = Vector::Zero(d);
      for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) conv(j) += v(k) * w(((j - k) % d + d) % d);
      }
      const AlgebraElement prod = mul(AlgebraElement::circulant(v), AlgebraElement::circulant(w));
      CHECK(max_abs(prod.first_row() - conv) <= 1e-12);
      CHECK(max_abs(prod.dense() - AlgebraElement::circulant(v).dense() * AlgebraElement::circulant(w).dense()) <= 1e-12);
    }

    const auto bd = AlgebraDescriptor::block_diag({2, 1, 3});
    const AlgebraElement a = testing::random_element(rng, bd);
    const AlgebraElement b = testing::random_element(rng, bd);
    CHECK(max_abs(mul(a, b).dense() - a.dense() * b.dense()) <= 1e-12);

    CHECK_THROWS_AS(mul(a, AlgebraElement::identity(AlgebraDescriptor::full(6))), Error);
  }

  TEST_CASE("adjoint") {
    std::mt19937_64 rng(22);
    const Matrix s = testing::random_spd(rng, 3);
    const AlgebraElement sym = make_element(AlgebraDescriptor::full(3), s);
    CHECK(adjoint(sym).dense() == s);
    for (int trial = 0; trial < 30; ++trial) {
      const auto desc = testing::random_descriptor(rng, 5);
      const AlgebraElement a = testing::random_element(rng, desc);
      const AlgebraElement b = testing::random_element(rng, desc);
      CHECK(adjoint(adjoint(a)).dense() == a.dense());
      CHECK(adjoint(a).dense() == a.dense().transpose());
      CHECK(max_abs(adjoint(mul(a, b)).dense() - mul(adjoint(b), adjoint(a)).dense()) <= 1e-12);
    }
  }

  TEST_CASE("trace") {
    CHECK(trace(AlgebraElement::identity(AlgebraDescriptor::full(4))) == 4.0);
    CHECK(trace(AlgebraElement::identity(AlgebraDescriptor::circulant(5))) == 5.0);
    const Matrix d3 = Vector((Vector(3) << 1, 2, 3).finished()).asDiagonal();
    CHECK(trace(make_element(AlgebraDescriptor::diagonal(3), d3)) == 6.0);
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
      const auto desc = testing::random_descriptor(rng, 6);
      const AlgebraElement a = testing::random_element(rng, desc);
      const AlgebraElement b = testing::random_element(rng, desc);
      CHECK(std::abs(trace(mul(a, b)) - trace(mul(b, a))) <= 1e-12 * (1.0 + std::abs(trace(mul(a, b)))));
      CHECK(std::abs(trace(a) - a.dense().trace()) <= 1e-12);
    }
  }

  TEST_CASE("op_norm and hs_norm") {
    CHECK(op_norm(AlgebraElement::identity(AlgebraDescriptor::full(3))) == doctest::Approx(1.0).epsilon(1e-15));
    const Matrix m = Vector((Vector(3) << 1, -2, 3).finished()).asDiagonal();
    CHECK(op_norm(make_element(AlgebraDescriptor::diagonal(3), m)) == doctest::Approx(3.0).epsilon(1e-15));
    const Matrix m2 = Vector((Vector(3) << 1, 2, 3).finished()).asDiagonal();
    CHECK(hs_norm(make_element(AlgebraDescriptor::full(3), m2)) == doctest::Approx(std::sqrt(14.0)).epsilon(1e-15));
    CHECK(hs_norm(AlgebraElement::identity(AlgebraDescriptor::circulant(7))) == doctest::Approx(std::sqrt(7.0)).epsilon(1e-15));

    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 100; ++trial) {
      const int d = 1 + trial % 9;
      const auto desc = testing::random_descriptor(rng, d);
      const AlgebraElement a = testing::random_element(rng, desc);
      const double op = op_norm(a);
      CHECK(std::abs(op - svd_top(a.dense())) <= 1e-10 * (1.0 + op));
      const double ata = op_norm(mul(adjoint(a), a));
      CHECK(std::abs(ata - op * op) <= 1e-10 * (1.0 + op * op));
      const double hs = hs_norm(a);
      CHECK(op <= hs * (1.0 + 1e-12));
      CHECK(hs <= std::sqrt(static_cast<double>(d)) * op * (1.0 + 1e-12));
    }
  }

  TEST_CASE("psd_calculus") {
    const Matrix m = Vector((Vector(2) << -2, 3).finished()).asDiagonal();
    const AlgebraElement a = make_element(AlgebraDescriptor::diagonal(2), m);
    const Matrix expected = Vector((Vector(2) << 2, 3).finished()).asDiagonal();
    CHECK(max_abs(psd_calculus(a, PsdMode::Abs).dense() - expected) <= 1e-14);

    const auto id = AlgebraElement::identity(AlgebraDescriptor::full(3));
    CHECK(max_abs(psd_calculus(id, PsdMode::Sqrt).dense() - Matrix::Identity(3, 3)) <= 1e-14);

    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 30; ++trial) {
      const int d = 2 + trial % 6;
      const Matrix s = testing::random_spd(rng, d);
      const AlgebraElement p = make_element(AlgebraDescriptor::full(d), s);
      const Matrix r = psd_calculus(p, PsdMode::InvSqrt).dense();
      CHECK(max_abs(r * s * r - Matrix::Identity(d, d)) <= 1e-8);
      const Matrix sq = psd_calculus(p, PsdMode::Sqrt).dense();
      CHECK((sq * sq - s).norm() <= 1e-8 * s.norm());
      CHECK(max_abs(psd_calculus(p, PsdMode::Inv).dense() * s - Matrix::Identity(d, d)) <= 1e-8);
    }

    // Block-diagonal and circulant results stay in their subalgebras.
    const auto bd = AlgebraDescriptor::block_diag({2, 2});
    Matrix blocks = Matrix::Zero(4, 4);
    blocks.block(0, 0, 2, 2) = testing::random_spd(rng, 2);
    blocks.block(2, 2, 2, 2) = testing::random_spd(rng, 2);
    const AlgebraElement be = make_element(bd, blocks);
    CHECK(off_pattern_zero(psd_calculus(be, PsdMode::InvSqrt).dense(), bd));
    const Vector row = (Vector(4) << 4, 1, 0.5, 1).finished();  // symmetric circulant, positive definite
    const AlgebraElement ce = AlgebraElement::circulant(row);
    const Matrix csq = psd_calculus(ce, PsdMode::Sqrt).dense();
    CHECK(max_abs(csq * csq - ce.dense()) <= 1e-10);

    Matrix singular = Matrix::Identity(2, 2);
    singular(1, 1) = 1e-14;
    try {
      psd_calculus(make_element(AlgebraDescriptor::full(2), singular), PsdMode::Inv);
      FAIL("expected SingularElement");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SingularElement);
    }
    Matrix nonsym = Matrix::Identity(2, 2);
    nonsym(0, 1) = 1.0;
    try {
      psd_calculus(make_element(AlgebraDescriptor::full(2), nonsym), PsdMode::Sqrt);
      FAIL("expected NotSymmetric");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotSymmetric);
    }
    CHECK_NOTHROW(psd_calculus(make_element(AlgebraDescriptor::full(2), nonsym), PsdMode::Abs));
  }

  TEST_CASE("project_onto") {
    const Matrix m = (Matrix(2, 2) << 1, 2, 3, 4).finished();
    const AlgebraElement p = project_onto(m, AlgebraDescriptor::circulant(2));
    CHECK(p.first_row()(0) == 2.5);
    CHECK(p.first_row()(1) == 2.5);

    std::mt19937_64 rng(26);
    for (int trial = 0; trial < 40; ++trial) {
      const int d = 1 + trial % 7;
      const auto desc = testing::random_descriptor(rng, d);
      const AlgebraElement a = testing::random_element(rng, desc);
      CHECK(max_abs(project_onto(a.dense(), desc).dense() - a.dense()) <= 1e-15);

      // Residual is HS-orthogonal to every basis element of the subalgebra.
      const Matrix dense = testing::random_matrix(rng, d, d);
      const Matrix residual = dense - project_onto(dense, desc).dense();
      const auto dof = static_cast<Eigen::Index>(desc.degrees_of_freedom());
      for (Eigen::Index k = 0; k < dof; ++k) {
        Vector e = Vector::Zero(dof);
        e(k) = 1.0;
        const Matrix basis = AlgebraElement::from_params(desc, e).dense();
        CHECK(std::abs((residual.array() * basis.array()).sum()) <= 1e-12);
      }
    }
    CHECK_THROWS_AS(project_onto(Matrix::Zero(2, 3), AlgebraDescriptor::full(2)), Error);
  }

  TEST_CASE("is_psd") {
    CHECK(is_psd(AlgebraElement::identity(AlgebraDescriptor::full(3)), 0.0));
    const Matrix m = Vector((Vector(2) << 1, -1).finished()).asDiagonal();
    CHECK_FALSE(is_psd(make_element(AlgebraDescriptor::diagonal(2), m), 1e-8));
    std::mt19937_64 rng(27);
    for (int trial = 0; trial < 30; ++trial) {
      const auto desc = testing::random_descriptor(rng, 5);
      const AlgebraElement a = testing::random_element(rng, desc);
      CHECK(is_psd(mul(adjoint(a), a), 1e-10));
    }
    Matrix nonsym = Matrix::Identity(2, 2);
    nonsym(1, 0) = 3.0;
    CHECK_THROWS_AS(is_psd(make_element(AlgebraDescriptor::full(2), nonsym), 0.0), Error);
  }

  TEST_CASE("closure: products, adjoints and sums keep off-pattern entries exactly zero") {
    std::mt19937_64 rng(28);
    for (int trial = 0; trial < 50; ++trial) {
      const auto desc = AlgebraDescriptor::block_diag(testing::random_partition(rng, 8));
      const AlgebraElement a = testing::random_element(rng, desc);
      const AlgebraElement b = testing::random_element(rng, desc);
      CHECK(off_pattern_zero(mul(a, b).dense(), desc));
      CHECK(off_pattern_zero(adjoint(a).dense(), desc));
      CHECK(off_pattern_zero((a + b).dense(), desc));
      CHECK_NOTHROW(make_element(desc, mul(a, b).dense()));
      const AlgebraElement c = testing::random_element(rng, AlgebraDescriptor::circulant(6));
      const AlgebraElement e = testing::random_element(rng, AlgebraDescriptor::circulant(6));
      CHECK_NOTHROW(make_element(c.desc(), mul(c, e).dense()));
      CHECK_NOTHROW(make_element(c.desc(), (c + e).dense()));
    }
  }

  TEST_CASE("params round trip") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
      const auto desc = testing::random_descriptor(rng, 6);
      const AlgebraElement a = testing::random_element(rng, desc);
      CHECK(AlgebraElement::from_params(desc, a.params()).dense() == a.dense());
    }
  }
}
