#include "sagin/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace sagin {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = cplx(1.0, 0.0);
  return m;
}

bool ComplexMatrix::all_finite() const {
  for (const cplx& z : data_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions do not match");
  ComplexMatrix out(a.rows(), b.cols());
  const std::size_t n = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < m; ++j) out(i, j) += aik * b(k, j);
    }
  }
  if (!out.all_finite()) throw std::runtime_error("matmul: non-finite result");
  return out;
}

ComplexMatrix hermitian(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) out(k, i) = std::conj(a(i, k));
  return out;
}

ComplexMatrix pseudo_inverse(const ComplexMatrix& a) {
  const std::size_t k = a.rows(), n = a.cols();
  require(k >= 1 && n >= 1, "pseudo_inverse: empty matrix");

  // Gram matrix G = A A^H (K x K, Hermitian).
  ComplexMatrix g(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      cplx acc(0.0, 0.0);
      for (std::size_t c = 0; c < n; ++c) acc += a(i, c) * std::conj(a(j, c));
      g(i, j) = acc;
    }
  }

  // Solve G X = A in-place; X overwrites a working copy of A.
  ComplexMatrix x = a;
  double max_pivot = 0.0, min_pivot = 0.0;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot_row = col;
    double best = std::abs(g(col, col));
    for (std::size_t r = col + 1; r < k; ++r) {
      const double mag = std::abs(g(r, col));
      if (mag > best) {
        best = mag;
        pivot_row = r;
      }
    }
    if (col == 0) {
      max_pivot = min_pivot = best;
    } else {
      max_pivot = std::max(max_pivot, best);
      min_pivot = std::min(min_pivot, best);
    }
    if (best == 0.0 || min_pivot < 1e-12 * max_pivot) {
      throw SingularMatrixError(
          "pseudo_inverse: rank-deficient input (pivot " + std::to_string(best) +
          " below 1e-12 of largest pivot " + std::to_string(max_pivot) + ")");
    }
    if (pivot_row != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(g(col, c), g(pivot_row, c));
      for (std::size_t c = 0; c < n; ++c) std::swap(x(col, c), x(pivot_row, c));
    }
    const cplx inv_p = cplx(1.0, 0.0) / g(col, col);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const cplx factor = g(r, col) * inv_p;
      if (factor == cplx(0.0, 0.0)) continue;
      for (std::size_t c = col; c < k; ++c) g(r, c) -= factor * g(col, c);
      for (std::size_t c = 0; c < n; ++c) x(r, c) -= factor * x(col, c);
    }
    for (std::size_t c = col; c < k; ++c) g(col, c) *= inv_p;
    for (std::size_t c = 0; c < n; ++c) x(col, c) *= inv_p;
  }

  ComplexMatrix pinv = hermitian(x);
  if (!pinv.all_finite()) throw SingularMatrixError("pseudo_inverse: non-finite result");
  return pinv;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix64(seed ^ mix64(stream * 0xD6E8FEB86659FD93ULL))) {}

std::uint64_t Rng::next_u64() {
  return mix64(key_ + counter_++ * 0x9E3779B97F4A7C15ULL);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

cplx Rng::complex_gaussian(double variance) {
  if (variance == 0.0) return cplx(0.0, 0.0);
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-variance * std::log(u1));
  return cplx(r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2));
}

std::vector<cplx> sample_complex_gaussian(Rng& rng, std::size_t n, double variance) {
  require(variance >= 0.0, "sample_complex_gaussian: negative variance");
  std::vector<cplx> out(n);
  if (variance == 0.0) return out;
  for (cplx& z : out) z = rng.complex_gaussian(variance);
  return out;
}

}  // namespace sagin
