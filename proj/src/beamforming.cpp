#include "sagin/beamforming.hpp"

#include <cmath>
#include <string>

namespace sagin {

namespace {

cplx row_dot_col(const ComplexMatrix& h, std::size_t row, const ComplexMatrix& w,
                 std::size_t col) {
  cplx acc(0.0, 0.0);
  for (std::size_t c = 0; c < h.cols(); ++c) acc += h(row, c) * w(c, col);
  return acc;
}

}  // namespace

BeamformingMatrix zf_directions(const ComplexMatrix& h) {
  const std::size_t k = h.rows(), n = h.cols();
  if (k > n) {
    throw InfeasibleError(
        "zf_directions: " + std::to_string(k) + " streams but only " + std::to_string(n) +
        " antennas; zero-forcing needs N >= K_sat + K_UE transmit degrees of freedom");
  }
  ComplexMatrix pinv;
  try {
    pinv = pseudo_inverse(h);
  } catch (const SingularMatrixError& e) {
    throw InfeasibleError(
        std::string("zf_directions: channel is rank deficient, the degrees-of-freedom "
                    "condition N >= K_sat + K_UE fails in substance (") +
        e.what() + ")");
  }
  // Normalize each column to unit norm.
  BeamformingMatrix dirs{ComplexMatrix(n, k)};
  for (std::size_t col = 0; col < k; ++col) {
    double norm2 = 0.0;
    for (std::size_t r = 0; r < n; ++r) norm2 += std::norm(pinv(r, col));
    if (norm2 <= 0.0)
      throw InfeasibleError("zf_directions: zero pseudo-inverse column " + std::to_string(col));
    const double inv_norm = 1.0 / std::sqrt(norm2);
    for (std::size_t r = 0; r < n; ++r) dirs.w(r, col) = pinv(r, col) * inv_norm;
  }
  return dirs;
}

BeamformingMatrix min_power_scaling(const BeamformingMatrix& dirs, const ComplexMatrix& h,
                                    double gamma_min, double sigma2_w) {
  const std::vector<double> targets(h.rows(), gamma_min);
  return min_power_scaling(dirs, h, targets, sigma2_w);
}

BeamformingMatrix min_power_scaling(const BeamformingMatrix& dirs, const ComplexMatrix& h,
                                    std::span<const double> gamma_targets, double sigma2_w) {
  const std::size_t k = h.rows();
  if (dirs.n_streams() != k || dirs.n_antennas() != h.cols())
    throw std::invalid_argument("min_power_scaling: direction/channel shape mismatch");
  if (gamma_targets.size() != k)
    throw std::invalid_argument("min_power_scaling: one SINR target per stream required");

  BeamformingMatrix scaled{ComplexMatrix(dirs.n_antennas(), k)};
  for (std::size_t col = 0; col < k; ++col) {
    const cplx own = row_dot_col(h, col, dirs.w, col);
    const double own_mag = std::abs(own);
    if (own_mag == 0.0) {
      throw InfeasibleError("min_power_scaling: direction " + std::to_string(col) +
                            " is orthogonal to its own channel");
    }
    const double scale = std::sqrt(gamma_targets[col] * sigma2_w) / own_mag;
    for (std::size_t r = 0; r < dirs.n_antennas(); ++r)
      scaled.w(r, col) = dirs.w(r, col) * scale;
  }
  return scaled;
}

SinrReport compute_sinr(const ComplexMatrix& h, const BeamformingMatrix& w, double sigma2_w) {
  if (h.cols() != w.n_antennas() || h.rows() != w.n_streams())
    throw std::invalid_argument("compute_sinr: channel/beamformer shape mismatch");
  if (sigma2_w <= 0.0) throw std::invalid_argument("compute_sinr: sigma2 must be positive");

  const std::size_t k = h.rows();
  SinrReport report;
  report.noise_w = sigma2_w;
  report.sinr.resize(k);
  report.signal_w.resize(k);
  report.interference_w.resize(k);
  for (std::size_t stream = 0; stream < k; ++stream) {
    double interference = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double p = std::norm(row_dot_col(h, stream, w.w, i));
      if (i == stream)
        report.signal_w[stream] = p;
      else
        interference += p;
    }
    report.interference_w[stream] = interference;
    report.sinr[stream] = report.signal_w[stream] / (interference + sigma2_w);
  }
  return report;
}

double total_power(const BeamformingMatrix& w) {
  double p = 0.0;
  for (const cplx& z : w.w.data()) p += std::norm(z);
  return p;
}

BeamformingMatrix project_power(const BeamformingMatrix& w, double p_t_watts) {
  if (p_t_watts <= 0.0) throw std::invalid_argument("project_power: p_t must be positive");
  const double p = total_power(w);
  if (p <= p_t_watts) return w;
  const double scale = std::sqrt(p_t_watts / p);
  BeamformingMatrix out = w;
  for (cplx& z : out.w.data()) z *= scale;
  return out;
}

}  // namespace sagin
