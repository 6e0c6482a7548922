#include "sagin/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sagin {

RateReport per_user_rates(const SinrReport& sinr, double bandwidth_hz, int n_uplink_streams) {
  if (bandwidth_hz <= 0.0) throw std::invalid_argument("per_user_rates: bandwidth must be > 0");
  if (n_uplink_streams < 0 || static_cast<std::size_t>(n_uplink_streams) > sinr.n_streams())
    throw std::invalid_argument("per_user_rates: uplink stream count out of range");
  RateReport report;
  for (std::size_t k = static_cast<std::size_t>(n_uplink_streams); k < sinr.n_streams(); ++k) {
    const double rate = bandwidth_hz * std::log2(1.0 + sinr.sinr[k]);
    report.per_user_rate_bps.push_back(rate);
    report.sum_rate_bps += rate;
  }
  return report;
}

AlphaFairResult alpha_fair_throughput(const std::vector<double>& rates_bps, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("alpha_fair_throughput: alpha must be >= 0");
  if (rates_bps.empty()) throw std::invalid_argument("alpha_fair_throughput: no rates");

  std::vector<double> rates = rates_bps;
  if (alpha >= 1.0) {
    for (double& r : rates) {
      if (r <= 0.0) {
        std::fprintf(stderr,
                     "alpha_fair_throughput: flooring zero rate at 1 bit/s (alpha=%g)\n", alpha);
        r = 1.0;
      }
    }
  }

  AlphaFairResult res;
  if (alpha == 1.0) {
    for (double r : rates) res.utility += std::log(r);
  } else {
    for (double r : rates) res.utility += std::pow(r, 1.0 - alpha) / (1.0 - alpha);
  }

  const double k = static_cast<double>(rates.size());
  if (alpha == 0.0) {
    // Fairness off: plain sum rate.
    for (double r : rates) res.fair_throughput_bps += r;
    return res;
  }

  bool any_positive = false;
  for (double r : rates) any_positive = any_positive || r > 0.0;
  if (!any_positive) return res;

  // Shares b_k >= 0 with sum b_k = K (equal split = one full share each,
  // users are spatially multiplexed) maximizing sum U_alpha(b_k r_k).
  // Marginal-utility equalization gives b_k = r_k^((1-alpha)/alpha) nu^(-1/alpha);
  // bisect on nu until the shares sum to K.
  auto share_sum = [&](double nu) {
    double s = 0.0;
    for (double r : rates)
      if (r > 0.0) s += std::pow(r, (1.0 - alpha) / alpha) * std::pow(nu, -1.0 / alpha);
    return s;
  };
  double lo = 1.0, hi = 1.0;
  while (share_sum(lo) < k) lo *= 0.5;    // shares grow as nu shrinks
  while (share_sum(hi) > k) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (share_sum(mid) > k)
      lo = mid;
    else
      hi = mid;
  }
  const double nu = 0.5 * (lo + hi);

  std::vector<double> shares(rates.size(), 0.0);
  double total_share = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] > 0.0)
      shares[i] = std::pow(rates[i], (1.0 - alpha) / alpha) * std::pow(nu, -1.0 / alpha);
    total_share += shares[i];
  }
  // Renormalize away the bisection residual.
  const double correction = k / total_share;
  for (std::size_t i = 0; i < rates.size(); ++i)
    res.fair_throughput_bps += shares[i] * correction * rates[i];
  return res;
}

double improvement_percent(double a, double b) {
  if (b <= 0.0) throw std::invalid_argument("improvement_percent: baseline must be positive");
  return 100.0 * (a - b) / b;
}

}  // namespace sagin
