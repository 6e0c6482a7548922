#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sagin {

using cplx = std::complex<double>;

/// Thrown when a matrix that must be (numerically) full rank is not.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense complex matrix, row-major, double precision.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0, 0.0)) {}

  static ComplexMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Standard complex matrix product. Throws std::invalid_argument on a
/// dimension mismatch.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

/// Hermitian (conjugate) transpose.
ComplexMatrix hermitian(const ComplexMatrix& a);

/// Right pseudo-inverse A+ = A^H (A A^H)^-1 of a full-row-rank K x N matrix,
/// K <= N, so that A A+ = I_K.
///
/// The K x K Gram system is solved by Gaussian elimination with partial
/// pivoting. If the smallest pivot falls below 1e-12 times the largest the
/// input is treated as rank deficient and SingularMatrixError is thrown.
ComplexMatrix pseudo_inverse(const ComplexMatrix& a);

/// Counter-based random generator. A (seed, stream) pair fully determines
/// the sample sequence, so logical streams can be split off without any
/// sequence coupling. Single-owner mutable state; never share one instance
/// across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();

  /// Standard normal via Box-Muller.
  double gaussian();

  /// One circularly symmetric complex Gaussian sample with the given total
  /// variance (variance/2 per real component).
  cplx complex_gaussian(double variance);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// n i.i.d. CN(0, variance) samples. Throws std::invalid_argument for
/// negative variance; variance 0 yields the all-zero vector.
std::vector<cplx> sample_complex_gaussian(Rng& rng, std::size_t n, double variance);

}  // namespace sagin
