#include "sagin/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace sagin {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

int sample_poisson(double lambda, Rng& rng) {
  if (lambda > 500.0) {
    // Normal approximation; exact inversion underflows at this size.
    const double k = std::round(lambda + std::sqrt(lambda) * rng.gaussian());
    return k < 0.0 ? 0 : static_cast<int>(k);
  }
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  do {
    p *= rng.uniform();
    ++k;
  } while (p > limit);
  return k - 1;
}

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

void GeometryConfig::validate() const {
  require(area_x_m > 0.0 && area_y_m > 0.0, "geometry: area sides must be positive");
  require(sat_height_m > 0.0 && haps_height_m > 0.0, "geometry: heights must be positive");
  require(carrier_freq_hz > 0.0, "geometry: carrier_freq_hz must be positive");
  require(bandwidth_hz > 0.0, "geometry: bandwidth_hz must be positive");
  require(n_antennas >= 1, "geometry: n_antennas must be >= 1");
  require(ris_side >= 1, "geometry: ris_side must be >= 1");
  require(ris_spacing_m >= 0.0, "geometry: ris_spacing_m must be >= 0");
  require(k_sat >= 1, "geometry: k_sat must be >= 1");
  require(k_ue >= 1, "geometry: k_ue must be >= 1");
  require(p_t_watts > 0.0, "geometry: p_t_watts must be positive");
  require(gamma_min > 0.0, "geometry: gamma_min must be positive");
  require(backlobe_gain > 0.0, "geometry: backlobe_gain must be positive");
  require(std::abs(sat_aoa_rad) < kPi / 2.0, "geometry: sat_aoa_rad must lie in (-pi/2, pi/2)");
}

std::string to_string(UserDistribution d) {
  switch (d) {
    case UserDistribution::kPoisson: return "poisson";
    case UserDistribution::kNormal: return "normal";
    case UserDistribution::kUniform: return "uniform";
  }
  return "poisson";
}

UserDistribution user_distribution_from_string(const std::string& s) {
  if (s == "poisson") return UserDistribution::kPoisson;
  if (s == "normal") return UserDistribution::kNormal;
  if (s == "uniform") return UserDistribution::kUniform;
  throw std::invalid_argument("unknown user distribution: " + s);
}

UserLayout place_users(const GeometryConfig& cfg, const UserDistSpec& dist, Rng& rng) {
  require(dist.fixed_count > 0 || dist.density_per_km2 > 0.0,
          "place_users: need fixed_count >= 1 or density > 0");

  int count = dist.fixed_count;
  if (count <= 0) {
    const double area_km2 = cfg.area_x_m * cfg.area_y_m * 1.0e-6;
    const double lambda = dist.density_per_km2 * area_km2;
    for (int attempt = 0; attempt < 100 && count <= 0; ++attempt)
      count = sample_poisson(lambda, rng);
    if (count <= 0)
      throw std::runtime_error("place_users: drew zero users 100 times; empty scenario");
  }

  UserLayout layout;
  layout.kind = dist.kind;
  layout.positions.reserve(static_cast<std::size_t>(count));

  const double cx = cfg.area_x_m / 2.0, cy = cfg.area_y_m / 2.0;
  for (int i = 0; i < count; ++i) {
    std::array<double, 2> p{};
    if (dist.kind == UserDistribution::kNormal) {
      const double sx = cfg.area_x_m / 6.0, sy = cfg.area_y_m / 6.0;
      do {
        p[0] = cx + sx * rng.gaussian();
        p[1] = cy + sy * rng.gaussian();
      } while (p[0] < 0.0 || p[0] > cfg.area_x_m || p[1] < 0.0 || p[1] > cfg.area_y_m);
    } else {
      p[0] = cfg.area_x_m * rng.uniform();
      p[1] = cfg.area_y_m * rng.uniform();
    }
    layout.positions.push_back(p);
  }
  return layout;
}

std::vector<double> user_angles(const GeometryConfig& cfg, const UserLayout& layout) {
  require(!layout.positions.empty(), "user_angles: empty layout");
  const double cx = cfg.area_x_m / 2.0, cy = cfg.area_y_m / 2.0;
  std::vector<double> angles;
  angles.reserve(layout.positions.size());
  for (const auto& p : layout.positions) {
    const double dx = p[0] - cx, dy = p[1] - cy;
    const double offset = std::hypot(dx, dy);
    double sign = 1.0;
    if (dx < 0.0 || (dx == 0.0 && dy < 0.0)) sign = -1.0;
    angles.push_back(sign * std::atan(offset / cfg.haps_height_m));
  }
  return angles;
}

double noise_power(const NoiseModel& nm, double bandwidth_hz) {
  require(bandwidth_hz > 0.0, "noise_power: bandwidth must be positive");
  const double dbm = nm.thermal_density_dbm_hz + 10.0 * std::log10(bandwidth_hz) +
                     nm.noise_figure_db;
  return dbm_to_watts(dbm);
}

}  // namespace sagin
