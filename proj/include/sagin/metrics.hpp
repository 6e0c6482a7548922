#pragma once

#include <vector>

#include "sagin/beamforming.hpp"

namespace sagin {

struct RateReport {
  std::vector<double> per_user_rate_bps;
  double sum_rate_bps = 0.0;
  double alpha = 0.0;
  double fair_throughput_bps = 0.0;
};

/// Shannon rates for the ground-user streams only:
/// rate_k = bandwidth * log2(1 + sinr_k). The first n_uplink_streams entries
/// of the report belong to satellite links and are skipped.
RateReport per_user_rates(const SinrReport& sinr, double bandwidth_hz, int n_uplink_streams);

struct AlphaFairResult {
  double utility = 0.0;
  double fair_throughput_bps = 0.0;
};

/// Classical alpha-fair utility of the given rates plus the total throughput
/// under an alpha-fair bandwidth-share reallocation.
///
/// Users are spatially multiplexed, so the equal-split baseline is one full
/// share each (K shares in total). For alpha > 0 the shares b_k >= 0 with
/// sum b_k = K maximize sum U_alpha(b_k r_k); the allocated rates equalize
/// marginal utility, r_k (b_k r_k)^-alpha = nu, and nu is found by bisection.
/// alpha = 0 switches fairness off and reports the plain sum rate. Equal
/// input rates reproduce the sum rate for every alpha. This mapping is a
/// reconstruction; see README.
AlphaFairResult alpha_fair_throughput(const std::vector<double>& rates_bps, double alpha);

/// 100 * (a - b) / b.
double improvement_percent(double a, double b);

}  // namespace sagin
