#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "sagin/numerics.hpp"

using namespace sagin;

namespace {

ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (auto& z : m.data()) z = rng.complex_gaussian(1.0);
  return m;
}

// Independent triple-loop reference product.
ComplexMatrix matmul_oracle(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      cplx acc(0.0, 0.0);
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

}  // namespace

TEST_CASE("matmul identity and scalar cases") {
  Rng rng(1, 0);
  const ComplexMatrix a = random_matrix(2, 3, rng);
  const ComplexMatrix id = ComplexMatrix::identity(2);
  CHECK(max_abs_diff(matmul(id, a), a) == 0.0);

  ComplexMatrix j1(1, 1);
  j1(0, 0) = cplx(0.0, 1.0);
  const ComplexMatrix prod = matmul(j1, j1);
  CHECK(prod(0, 0).real() == doctest::Approx(-1.0));
  CHECK(prod(0, 0).imag() == doctest::Approx(0.0));
}

TEST_CASE("matmul matches the triple-loop oracle") {
  Rng rng(2, 0);
  const ComplexMatrix a = random_matrix(3, 4, rng);
  const ComplexMatrix b = random_matrix(4, 2, rng);
  CHECK(max_abs_diff(matmul(a, b), matmul_oracle(a, b)) <= 1.0e-12);
}

TEST_CASE("matmul rejects mismatched shapes") {
  Rng rng(3, 0);
  CHECK_THROWS_AS(matmul(random_matrix(2, 3, rng), random_matrix(2, 3, rng)),
                  std::invalid_argument);
}

TEST_CASE("matmul associativity on random conformable triples") {
  Rng rng(4, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = random_matrix(3, 5, rng);
    const ComplexMatrix b = random_matrix(5, 4, rng);
    const ComplexMatrix c = random_matrix(4, 2, rng);
    const ComplexMatrix left = matmul(matmul(a, b), c);
    const ComplexMatrix right = matmul(a, matmul(b, c));
    double scale = 0.0;
    for (const auto& z : left.data()) scale = std::max(scale, std::abs(z));
    CHECK(max_abs_diff(left, right) <= 1.0e-10 * std::max(scale, 1.0));
  }
}

TEST_CASE("hermitian conjugates and transposes") {
  ComplexMatrix a(1, 1);
  a(0, 0) = cplx(1.0, 1.0);
  const ComplexMatrix h = hermitian(a);
  CHECK(h(0, 0) == cplx(1.0, -1.0));

  ComplexMatrix d(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = 3.0;
  CHECK(max_abs_diff(hermitian(d), d) == 0.0);
}

TEST_CASE("hermitian is an exact involution") {
  Rng rng(5, 0);
  const ComplexMatrix a = random_matrix(4, 6, rng);
  const ComplexMatrix back = hermitian(hermitian(a));
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(a.data()[i] == back.data()[i]);
}

TEST_CASE("pseudo_inverse basic examples") {
  const ComplexMatrix id3 = ComplexMatrix::identity(3);
  CHECK(max_abs_diff(pseudo_inverse(id3), id3) <= 1.0e-14);

  ComplexMatrix row(1, 2);
  row(0, 0) = 2.0;
  const ComplexMatrix pinv = pseudo_inverse(row);
  REQUIRE(pinv.rows() == 2);
  REQUIRE(pinv.cols() == 1);
  CHECK(pinv(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(pinv(1, 0)) == doctest::Approx(0.0));
}

TEST_CASE("pseudo_inverse: A A+ = I for full-row-rank inputs") {
  Rng rng(6, 0);
  for (std::size_t k = 1; k <= 6; ++k) {
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t n = k + static_cast<std::size_t>(rng.uniform() * (k + 1));
      const ComplexMatrix a = random_matrix(k, n, rng);
      const ComplexMatrix api = matmul(a, pseudo_inverse(a));
      CHECK(max_abs_diff(api, ComplexMatrix::identity(k)) <= 1.0e-9);
    }
  }
}

TEST_CASE("pseudo_inverse flags rank deficiency") {
  Rng rng(7, 0);
  ComplexMatrix a = random_matrix(3, 5, rng);
  for (std::size_t c = 0; c < 5; ++c) a(2, c) = a(0, c);  // duplicate row
  CHECK_THROWS_AS(pseudo_inverse(a), SingularMatrixError);
}

TEST_CASE("rng reproducibility: equal (seed, stream) gives equal draws") {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 10000; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(42, 4);
  Rng d(43, 3);
  Rng ref(42, 3);
  bool stream_differs = false, seed_differs = false;
  for (int i = 0; i < 16; ++i) {
    const std::uint64_t r = ref.next_u64();
    stream_differs = stream_differs || c.next_u64() != r;
    seed_differs = seed_differs || d.next_u64() != r;
  }
  CHECK(stream_differs);
  CHECK(seed_differs);
}

TEST_CASE("sample_complex_gaussian moments and degenerate cases") {
  Rng rng(42, 0);
  const auto zeros = sample_complex_gaussian(rng, 10, 0.0);
  for (const auto& z : zeros) CHECK(z == cplx(0.0, 0.0));

  Rng rng2(42, 1);
  const std::size_t n = 100000;
  const auto samples = sample_complex_gaussian(rng2, n, 1.0);
  cplx mean(0.0, 0.0);
  double var = 0.0;
  for (const auto& z : samples) mean += z;
  mean /= static_cast<double>(n);
  for (const auto& z : samples) var += std::norm(z - mean);
  var /= static_cast<double>(n);
  CHECK(std::abs(mean) < 0.02);
  CHECK(var > 0.98);
  CHECK(var < 1.02);

  Rng rng3(1, 0);
  CHECK_THROWS_AS(sample_complex_gaussian(rng3, 4, -1.0), std::invalid_argument);

  Rng a(9, 2), b(9, 2);
  const auto va = sample_complex_gaussian(a, 100, 2.5);
  const auto vb = sample_complex_gaussian(b, 100, 2.5);
  for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i] == vb[i]);
}
