#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "sagin/numerics.hpp"

namespace sagin {

/// Thrown when the zero-forcing problem has no solution: too few transmit
/// degrees of freedom, a rank-deficient channel, or a direction orthogonal
/// to its own stream.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// N x (K_sat + K_UE) beamforming matrix; column i is the beamformer of
/// stream i (satellite streams first, then users).
struct BeamformingMatrix {
  ComplexMatrix w;

  std::size_t n_antennas() const { return w.rows(); }
  std::size_t n_streams() const { return w.cols(); }
};

/// Per-stream SINR decomposition: sinr[k] = signal_w[k] /
/// (interference_w[k] + noise_w), stored exactly as computed.
struct SinrReport {
  std::vector<double> sinr;
  std::vector<double> signal_w;
  std::vector<double> interference_w;
  double noise_w = 0.0;

  std::size_t n_streams() const { return sinr.size(); }
};

/// Unit-norm zero-forcing directions: the columns of the row pseudo-inverse
/// H+, normalized. Column k lies in the null space of every other row, so
/// |h(i) . w_k| <= 1e-9 for i != k. Throws InfeasibleError when K > N or the
/// channel is rank deficient (the degrees-of-freedom condition N >= K fails
/// in substance).
BeamformingMatrix zf_directions(const ComplexMatrix& h);

/// Scale each ZF direction so its own-stream SINR constraint binds with
/// equality: |h(k) . w_k|^2 = gamma_min * sigma2. Under exact nulling the
/// interference is zero, so this is the minimum-power point of the
/// power-minimization problem restricted to the ZF feasible set.
BeamformingMatrix min_power_scaling(const BeamformingMatrix& dirs, const ComplexMatrix& h,
                                    double gamma_min, double sigma2_w);

/// Same, with an individual SINR target per stream (uplink streams may use a
/// different floor than ground users).
BeamformingMatrix min_power_scaling(const BeamformingMatrix& dirs, const ComplexMatrix& h,
                                    std::span<const double> gamma_targets, double sigma2_w);

/// Per-stream SINR with unit-energy symbols: signal |h(k) . w_k|^2,
/// interference sum_{i != k} |h(k) . w_i|^2 received at stream k.
SinrReport compute_sinr(const ComplexMatrix& h, const BeamformingMatrix& w, double sigma2_w);

/// Total transmit power sum_i ||w_i||^2.
double total_power(const BeamformingMatrix& w);

/// Uniform scaling onto the power budget: unchanged when already within
/// p_t, otherwise scaled by sqrt(p_t / total_power).
BeamformingMatrix project_power(const BeamformingMatrix& w, double p_t_watts);

}  // namespace sagin
