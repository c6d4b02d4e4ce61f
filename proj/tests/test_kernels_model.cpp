#include <doctest.h>

#include <cmath>

#include "rkhm/kernels.hpp"
#include "rkhm/model.hpp"
#include "test_util.hpp"

using namespace rkhm;
using rkhm::testing::max_abs;

namespace {

double laplacian_oracle(double c, const Matrix& x, const Matrix& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) s += std::abs(x(i, j) - y(i, j));
  }
  return std::exp(-c * s);
}

// Representer sum written directly from kernel evaluations.
Matrix layer_oracle(const Layer& layer, const std::vector<Matrix>& anchors, const Matrix& x) {
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    out += kernel_eval(layer.kernel, x, anchors[i]).dense() * layer.coeffs[i].dense();
  }
  return out;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar kernels") {
    const ScalarKernel lap{ScalarKernelKind::Laplacian, 0.5};
    const Matrix x = Matrix::Zero(2, 2);
    const Matrix y = Matrix::Ones(2, 2);
    CHECK(scalar_eval(lap, x, y) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(scalar_eval(lap, x, x) == 1.0);
    const ScalarKernel gauss{ScalarKernelKind::Gaussian, 0.5};
    CHECK(scalar_eval(gauss, x, 2.0 * y) == doctest::Approx(std::exp(-8.0)).epsilon(1e-15));
    CHECK_THROWS_AS(scalar_eval(lap, x, Matrix::Zero(3, 3)), Error);

    // Gradient vs central differences at a point away from kinks.
    std::mt19937_64 rng(31);
    const Matrix a = testing::random_matrix(rng, 3, 3);
    const Matrix b = testing::random_matrix(rng, 3, 3);
    for (const auto& k : {lap, gauss}) {
      const Matrix g = scalar_grad_x(k, a, b, scalar_eval(k, a, b));
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        Matrix p = a, m = a;
        p.data()[i] += 1e-6;
        m.data()[i] -= 1e-6;
        const double fd = (scalar_eval(k, p, b) - scalar_eval(k, m, b)) / 2e-6;
        CHECK(std::abs(fd - g.data()[i]) <= 1e-7);
      }
    }
    CHECK(scalar_grad_x(lap, a, a, 1.0) == Matrix::Zero(3, 3));
  }

  TEST_CASE("separable kernel construction and evaluation") {
    const ScalarKernel lap{ScalarKernelKind::Laplacian, 0.001};
    const auto id = AlgebraElement::identity(AlgebraDescriptor::full(3));
    const MatrixKernel k = MatrixKernel::separable(lap, id);
    const Matrix x = Matrix::Identity(3, 3);
    const Matrix y = Matrix::Zero(3, 3);
    CHECK(max_abs(kernel_eval(k, x, y).dense() - std::exp(-0.003) * Matrix::Identity(3, 3)) <= 1e-15);

    Matrix nonsym = Matrix::Identity(2, 2);
    nonsym(0, 1) = 1.0;
    CHECK_THROWS_AS(MatrixKernel::separable(lap, make_element(AlgebraDescriptor::full(2), nonsym)), Error);
    const Matrix indefinite = Vector((Vector(2) << 1, -1).finished()).asDiagonal();
    CHECK_THROWS_AS(MatrixKernel::separable(lap, make_element(AlgebraDescriptor::diagonal(2), indefinite)),
                    Error);
  }

  TEST_CASE("product-convolution kernel against its formula") {
    std::mt19937_64 rng(32);
    const ScalarKernel lap{ScalarKernelKind::Laplacian, 0.2};
    const auto desc = AlgebraDescriptor::block_diag({2, 2});
    const AlgebraElement a = testing::random_element(rng, desc);
    const MatrixKernel k = MatrixKernel::product_conv(lap, a);
    const Matrix x = testing::random_matrix(rng, 4, 4);
    const Matrix y = testing::random_matrix(rng, 4, 4);
    const Matrix expected = laplacian_oracle(0.2, x * a.dense(), y * a.dense()) * x * y.transpose();
    CHECK(max_abs(kernel_eval(k, x, y).dense() - expected) <= 1e-14);
    // Hermitian symmetry k(x, y) = k(y, x)^T.
    CHECK(max_abs(kernel_eval(k, y, x).dense() - kernel_eval(k, x, y).dense().transpose()) <= 1e-15);
  }

  TEST_CASE("kernel_vjp against finite differences") {
    std::mt19937_64 rng(33);
    const ScalarKernel gauss{ScalarKernelKind::Gaussian, 0.1};
    for (int variant = 0; variant < 2; ++variant) {
      const auto desc = AlgebraDescriptor::block_diag({1, 2});
      const MatrixKernel k = variant == 0 ? MatrixKernel::separable(gauss, testing::random_pd_element(rng, desc))
                                          : MatrixKernel::product_conv(gauss, testing::random_element(rng, desc));
      const Matrix x = testing::random_matrix(rng, 3, 3);
      const Matrix y = testing::random_matrix(rng, 3, 3);
      const Matrix bar = testing::random_matrix(rng, 3, 3);
      Matrix gx = Matrix::Zero(3, 3), gy = Matrix::Zero(3, 3);
      kernel_vjp(k, x, y, bar, gx, gy);
      auto f = [&](const Matrix& xx, const Matrix& yy) {
        return (kernel_eval(k, xx, yy).dense().array() * bar.array()).sum();
      };
      for (Eigen::Index i = 0; i < 9; ++i) {
        Matrix p = x, m = x;
        p.data()[i] += 1e-6;
        m.data()[i] -= 1e-6;
        CHECK(std::abs((f(p, y) - f(m, y)) / 2e-6 - gx.data()[i]) <= 1e-6);
        p = y;
        m = y;
        p.data()[i] += 1e-6;
        m.data()[i] -= 1e-6;
        CHECK(std::abs((f(x, p) - f(x, m)) / 2e-6 - gy.data()[i]) <= 1e-6);
      }
    }
  }

  TEST_CASE("Gram matrices: PSD, symmetric, factored equals dense") {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 30; ++trial) {
      const int d = 1 + trial % 6;
      const int n = 1 + trial % 9;
      const auto desc = testing::random_descriptor(rng, d);
      const ScalarKernel lap{ScalarKernelKind::Laplacian, 0.3};
      const MatrixKernel k = MatrixKernel::separable(lap, testing::random_pd_element(rng, desc));
      const auto pts = testing::random_points(rng, n, d);
      const GramMatrix fac = gram(k, pts);
      CHECK(fac.is_factored());
      const Matrix dense = gram_dense(k, pts).materialize();
      CHECK(max_abs(fac.materialize() - dense) <= 1e-10);
      CHECK(max_abs(dense - dense.transpose()) <= 1e-15 * (1.0 + max_abs(dense)));
      Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8);
      for (int i = 0; i < n; ++i) {
        for (int l = 0; l < n; ++l) {
          CHECK(max_abs(fac.block(i, l) - kernel_eval(k, pts[i], pts[l]).dense()) <= 1e-14);
        }
      }

      const MatrixKernel pc = MatrixKernel::product_conv(lap, testing::random_element(rng, desc));
      const GramMatrix gpc = gram(pc, pts);
      CHECK_FALSE(gpc.is_factored());
      Eigen::SelfAdjointEigenSolver<Matrix> es2(gpc.materialize());
      CHECK(es2.eigenvalues().minCoeff() >= -1e-8 * (1.0 + es2.eigenvalues().maxCoeff()));
    }
    const ScalarKernel lap{ScalarKernelKind::Laplacian, 0.3};
    const MatrixKernel k = MatrixKernel::separable(lap, AlgebraElement::identity(AlgebraDescriptor::full(2)));
    CHECK_THROWS_AS(gram(k, {}), Error);
  }

  TEST_CASE("trace_sum") {
    const ScalarKernel lap{ScalarKernelKind::Laplacian, 0.3};
    const MatrixKernel k = MatrixKernel::separable(lap, AlgebraElement::identity(AlgebraDescriptor::full(3)));
    std::mt19937_64 rng(35);
    // Scalar kernel is 1 on the diagonal, so the sum is n * tr(I).
    CHECK(trace_sum(k, testing::random_points(rng, 5, 3)) == doctest::Approx(15.0).epsilon(1e-15));
  }
}

TEST_SUITE("model") {
  TEST_CASE("layer_forward equals the direct representer sum") {
    std::mt19937_64 rng(41);
    for (int variant = 0; variant < 2; ++variant) {
      testing::ModelSpec spec;
      spec.d = 5;
      spec.n = 4;
      spec.product_conv = variant == 1;
      spec.coeff_descs = {AlgebraDescriptor::block_diag({2, 3})};
      const DeepModel m = testing::random_model(rng, spec);
      const Matrix x = testing::random_matrix(rng, 5, 5);
      const Matrix expected = layer_oracle(m.layer(0), m.anchors(), x);
      CHECK(max_abs(layer_forward(m.layer(0), m.anchors(), x) - expected) <= 1e-12);
      CHECK(max_abs(m.forward(x) - expected) <= 1e-12);
    }
  }

  TEST_CASE("deep composition, anchor images and caching") {
    std::mt19937_64 rng(42);
    testing::ModelSpec spec;
    spec.d = 4;
    spec.n = 3;
    spec.coeff_descs = {AlgebraDescriptor::diagonal(4), AlgebraDescriptor::block_diag({2, 2}),
                        AlgebraDescriptor::full(4)};
    DeepModel m = testing::random_model(rng, spec);

    // Oracle: walk the layers, re-anchoring each at the previous images.
    std::vector<Matrix> anchors = m.anchors();
    const Matrix x = testing::random_matrix(rng, 4, 4);
    Matrix h = x;
    for (std::size_t j = 0; j < m.depth(); ++j) {
      h = layer_oracle(m.layer(j), anchors, h);
      std::vector<Matrix> next;
      for (const auto& z : anchors) next.push_back(layer_oracle(m.layer(j), anchors, z));
      for (std::size_t i = 0; i < next.size(); ++i) {
        CHECK(max_abs(m.anchor_images()[j + 1][i] - next[i]) <= 1e-12);
      }
      anchors = std::move(next);
    }
    CHECK(max_abs(m.forward(x) - h) <= 1e-12);
    CHECK(max_abs(m.forward_uncached(x) - h) <= 1e-12);
    CHECK(max_abs(model_forward(m, x) - h) <= 1e-12);

    // Changing a coefficient must invalidate the cache.
    const auto before = m.version();
    m.set_coeff(0, 1, testing::random_element(rng, AlgebraDescriptor::diagonal(4)));
    CHECK(m.version() != before);
    CHECK(max_abs(m.forward(x) - m.forward_uncached(x)) <= 1e-12);

    // Copies stay valid after the original goes away.
    DeepModel copy = m;
    { DeepModel tmp = std::move(m); }
    CHECK(max_abs(copy.forward(x) - copy.forward_uncached(x)) <= 1e-12);

    CHECK_THROWS_AS(copy.set_coeff(0, 0, testing::random_element(rng, AlgebraDescriptor::full(4))), Error);
  }

  TEST_CASE("rkhm norm equals the quadratic form oracle") {
    std::mt19937_64 rng(43);
    testing::ModelSpec spec;
    spec.d = 3;
    spec.n = 4;
    spec.coeff_descs = {AlgebraDescriptor::full(3)};
    for (int variant = 0; variant < 2; ++variant) {
      spec.product_conv = variant == 1;
      const DeepModel m = testing::random_model(rng, spec);
      Matrix q = Matrix::Zero(3, 3);
      for (int i = 0; i < 4; ++i) {
        for (int l = 0; l < 4; ++l) {
          q += m.layer(0).coeffs[i].dense().transpose() *
               kernel_eval(m.layer(0).kernel, m.anchors()[i], m.anchors()[l]).dense() *
               m.layer(0).coeffs[l].dense();
        }
      }
      CHECK(max_abs(rkhm_quadratic_form(m.layer(0), m.anchors()) - q) <= 1e-12);
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (q + q.transpose()));
      CHECK(rkhm_norm(m.layer(0), m.anchors()) ==
            doctest::Approx(std::sqrt(es.eigenvalues().cwiseAbs().maxCoeff())).epsilon(1e-12));
    }
  }

  TEST_CASE("model validation") {
    std::mt19937_64 rng(44);
    const ScalarKernel lap{ScalarKernelKind::Laplacian, 0.1};
    const auto desc = AlgebraDescriptor::full(2);
    Layer layer{MatrixKernel::separable(lap, AlgebraElement::identity(desc)), desc,
                {AlgebraElement::identity(desc)}};
    CHECK_THROWS_AS(DeepModel({layer}, testing::random_points(rng, 2, 2)), Error);
    CHECK_THROWS_AS(DeepModel({}, testing::random_points(rng, 1, 2)), Error);
    CHECK_NOTHROW(DeepModel({layer}, testing::random_points(rng, 1, 2)));
    layer.coeffs[0] = AlgebraElement::identity(AlgebraDescriptor::diagonal(2));
    CHECK_THROWS_AS(DeepModel({layer}, testing::random_points(rng, 1, 2)), Error);
  }
}
