#pragma once

#include <array>
#include <string>
#include <vector>

#include "sagin/numerics.hpp"

namespace sagin {

inline constexpr double kSpeedOfLight = 3.0e8;  // m/s
inline constexpr double kPi = 3.141592653589793238462643383279;

double db_to_linear(double db);
double linear_to_db(double lin);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Physical layout and radio parameters of one system instance: the HAPS
/// hovers above the centre of a rectangular ground area, the satellite link
/// leaves at a fixed angle, and an L x L RIS panel sits at ris_position_m.
struct GeometryConfig {
  double area_x_m = 100.0;
  double area_y_m = 100.0;
  double sat_height_m = 3.2e6;
  double haps_height_m = 2.0e4;
  std::array<double, 2> ris_position_m{25.0, 50.0};
  double carrier_freq_hz = 28.0e9;
  double bandwidth_hz = 400.0e6;
  int n_antennas = 50;  // N, per array
  int ris_side = 4;     // L
  double ris_spacing_m = 0.0;  // 0 resolves to c / (2 f)
  double sat_aoa_rad = kPi / 4.0;
  int k_sat = 1;
  int k_ue = 2;
  double p_t_watts = 1.0;   // 30 dBm budget
  double gamma_min = 1.0;   // 0 dB per-user SINR floor, linear
  double uplink_gamma_min = 0.0;  // 0 resolves to gamma_min
  double backlobe_gain = 1.0e-3;  // -30 dB uplink-array leakage toward users
  bool apply_pathloss = false;    // free-space amplitude scaling, off by default
  double channel_perturb_std = 0.0;  // per-entry CN(0, eps) channel perturbation
  int ris_serve_user = -1;  // -1 selects the user with the weakest direct channel

  double ris_spacing() const {
    return ris_spacing_m > 0.0 ? ris_spacing_m : kSpeedOfLight / (2.0 * carrier_freq_hz);
  }
  int ris_elements() const { return ris_side * ris_side; }
  int n_streams() const { return k_sat + k_ue; }
  double resolved_uplink_gamma_min() const {
    return uplink_gamma_min > 0.0 ? uplink_gamma_min : gamma_min;
  }
  /// Strict ZF needs N >= K_sat + K_UE transmit degrees of freedom.
  bool zf_feasible() const { return n_streams() <= n_antennas; }

  /// Throws std::invalid_argument when a length, frequency or count is not
  /// strictly positive. ZF infeasibility is deliberately not an error here.
  void validate() const;
};

enum class UserDistribution { kPoisson, kNormal, kUniform };

std::string to_string(UserDistribution d);
UserDistribution user_distribution_from_string(const std::string& s);

struct UserDistSpec {
  UserDistribution kind = UserDistribution::kPoisson;
  double density_per_km2 = 150.0;
  int fixed_count = 0;  // > 0 overrides the Poisson draw (needed for user sweeps)
};

struct UserLayout {
  std::vector<std::array<double, 2>> positions;  // inside [0,area_x] x [0,area_y]
  UserDistribution kind = UserDistribution::kPoisson;

  int count() const { return static_cast<int>(positions.size()); }
};

struct NoiseModel {
  double thermal_density_dbm_hz = -174.0;
  double noise_figure_db = 7.0;
};

/// Sample user positions.
///  - poisson: count ~ Poisson(density x area), positions uniform; a zero draw
///    is retried up to 100 times before erroring out.
///  - normal: Gaussian around the area centre, sigma = side/6 per axis,
///    rejection-resampled into bounds.
///  - uniform: i.i.d. uniform.
/// fixed_count > 0 pins the count for any distribution.
UserLayout place_users(const GeometryConfig& cfg, const UserDistSpec& dist, Rng& rng);

/// Elevation-plane AoA per user as seen from the HAPS: atan(horizontal offset
/// from the HAPS ground projection / haps_height), signed by the offset
/// direction (x first, then y on the x = centre line). Always in (-pi/2, pi/2).
std::vector<double> user_angles(const GeometryConfig& cfg, const UserLayout& layout);

/// Thermal noise power in watts: -174 dBm/Hz + 10 log10(bandwidth) + NF.
double noise_power(const NoiseModel& nm, double bandwidth_hz);

}  // namespace sagin
