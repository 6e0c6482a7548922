#include "sagin/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace sagin {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double wrap_two_pi(double x) {
  double w = std::fmod(x, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

// 2 pi f d_RIS / c, the per-element phase pitch of the panel.
double ris_pitch(const GeometryConfig& cfg) {
  return kTwoPi * cfg.carrier_freq_hz * cfg.ris_spacing() / kSpeedOfLight;
}

double free_space_amplitude(const GeometryConfig& cfg, double distance_m) {
  const double d = std::max(distance_m, 1.0);
  return kSpeedOfLight / (4.0 * kPi * cfg.carrier_freq_hz * d);
}

// Signed elevation angle of a ground point seen from a platform hovering
// above `ref` at height h. Same convention as user_angles.
double elevation_angle(const std::array<double, 2>& p, const std::array<double, 2>& ref,
                       double height) {
  const double dx = p[0] - ref[0], dy = p[1] - ref[1];
  const double offset = std::hypot(dx, dy);
  double sign = 1.0;
  if (dx < 0.0 || (dx == 0.0 && dy < 0.0)) sign = -1.0;
  return sign * std::atan(offset / height);
}

void perturb(std::vector<cplx>& v, double std_dev, Rng& rng) {
  if (std_dev <= 0.0) return;
  for (cplx& z : v) z += rng.complex_gaussian(std_dev * std_dev);
}

}  // namespace

std::vector<cplx> steering_vector(double angle_rad, int n) {
  if (n < 1) throw std::invalid_argument("steering_vector: n must be >= 1");
  std::vector<cplx> a(static_cast<std::size_t>(n));
  const double s = std::sin(angle_rad);
  for (int i = 0; i < n; ++i) {
    const double phase = -kPi * static_cast<double>(i) * s;
    a[static_cast<std::size_t>(i)] = cplx(std::cos(phase), std::sin(phase));
  }
  return a;
}

RisPhaseProfile ris_phase_profile(double omega_in, double omega_out, const GeometryConfig& cfg) {
  const double pitch = ris_pitch(cfg);
  const double s = std::sin(omega_in) + std::sin(omega_out);
  RisPhaseProfile profile;
  profile.phases.resize(static_cast<std::size_t>(cfg.ris_elements()));
  for (int l = 1; l <= cfg.ris_elements(); ++l)
    profile.phases[static_cast<std::size_t>(l - 1)] = wrap_two_pi(-pitch * l * s);
  return profile;
}

ComplexMatrix ris_reflection_matrix(const RisPhaseProfile& profile) {
  const std::size_t n = profile.phases.size();
  ComplexMatrix theta(n, n);
  for (std::size_t l = 0; l < n; ++l)
    theta(l, l) = cplx(std::cos(profile.phases[l]), std::sin(profile.phases[l]));
  return theta;
}

std::vector<cplx> ris_arrival_vector(double angle_rad, const GeometryConfig& cfg) {
  const double pitch = ris_pitch(cfg);
  const double s = std::sin(angle_rad);
  std::vector<cplx> a(static_cast<std::size_t>(cfg.ris_elements()));
  for (int l = 1; l <= cfg.ris_elements(); ++l) {
    const double phase = pitch * l * s;
    a[static_cast<std::size_t>(l - 1)] = cplx(std::cos(phase), std::sin(phase));
  }
  return a;
}

std::vector<cplx> ris_departure_vector(double angle_rad, const GeometryConfig& cfg) {
  const double pitch = ris_pitch(cfg);
  const double s = std::sin(angle_rad);
  std::vector<cplx> a(static_cast<std::size_t>(cfg.ris_elements()));
  for (int l = 1; l <= cfg.ris_elements(); ++l) {
    const double phase = -pitch * l * s;
    a[static_cast<std::size_t>(l - 1)] = cplx(std::cos(phase), std::sin(phase));
  }
  return a;
}

RisGeometry ris_geometry(const GeometryConfig& cfg, const UserLayout& layout) {
  if (layout.positions.empty()) throw std::invalid_argument("ris_geometry: empty layout");
  RisGeometry geom;
  const std::array<double, 2> center{cfg.area_x_m / 2.0, cfg.area_y_m / 2.0};
  geom.incidence_rad = elevation_angle(cfg.ris_position_m, center, cfg.haps_height_m);

  geom.user_bearing_rad.reserve(layout.positions.size());
  for (const auto& p : layout.positions) {
    const double dx = p[0] - cfg.ris_position_m[0];
    const double dy = p[1] - cfg.ris_position_m[1];
    geom.user_bearing_rad.push_back(std::atan2(dy, dx));
  }

  if (cfg.ris_serve_user >= 0) {
    if (cfg.ris_serve_user >= layout.count())
      throw std::invalid_argument("ris_geometry: ris_serve_user out of range");
    geom.served_user = cfg.ris_serve_user;
    return geom;
  }
  // Weakest direct channel; with unit-modulus steering rows the norms only
  // differ when path loss is enabled, and ties resolve to the lowest index.
  const auto angles = user_angles(cfg, layout);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < layout.count(); ++k) {
    double norm2 = cfg.backlobe_gain * cfg.n_antennas;
    if (cfg.apply_pathloss) {
      const double slant = cfg.haps_height_m / std::cos(angles[static_cast<std::size_t>(k)]);
      const double amp = free_space_amplitude(cfg, slant);
      norm2 *= amp * amp;
    }
    if (norm2 < best) {
      best = norm2;
      geom.served_user = k;
    }
  }
  return geom;
}

ChannelSet build_channels(const GeometryConfig& cfg, const UserLayout& layout,
                          const RisPhaseProfile& profile, Rng& rng) {
  if (layout.count() != cfg.k_ue)
    throw std::invalid_argument("build_channels: layout user count must equal k_ue");
  if (profile.elements() != cfg.ris_elements())
    throw std::invalid_argument("build_channels: profile length must equal L^2");

  const int n = cfg.n_antennas;
  const int l2 = cfg.ris_elements();

  ChannelSet cs;

  // Uplink rows h_UL^H from the satellite steering vector.
  cs.h_ul = ComplexMatrix(static_cast<std::size_t>(cfg.k_sat), static_cast<std::size_t>(n));
  {
    auto a_sat = steering_vector(cfg.sat_aoa_rad, n);
    double amp = 1.0;
    if (cfg.apply_pathloss) {
      const double slant =
          (cfg.sat_height_m - cfg.haps_height_m) / std::cos(cfg.sat_aoa_rad);
      amp = free_space_amplitude(cfg, slant);
    }
    for (int s = 0; s < cfg.k_sat; ++s)
      for (int c = 0; c < n; ++c)
        cs.h_ul(static_cast<std::size_t>(s), static_cast<std::size_t>(c)) =
            amp * std::conj(a_sat[static_cast<std::size_t>(c)]);
  }

  const RisGeometry geom = ris_geometry(cfg, layout);

  // Rank-1 HAPS->RIS link: arrival response at the panel times the Hermitian
  // HAPS-side steering vector for the same elevation angle.
  auto a_panel = ris_arrival_vector(geom.incidence_rad, cfg);
  auto a_haps = steering_vector(geom.incidence_rad, n);
  double haps_ris_amp = 1.0;
  if (cfg.apply_pathloss) {
    const double slant = cfg.haps_height_m / std::cos(geom.incidence_rad);
    haps_ris_amp = free_space_amplitude(cfg, slant);
  }
  cs.h_haps_ris = ComplexMatrix(static_cast<std::size_t>(l2), static_cast<std::size_t>(n));
  for (int l = 0; l < l2; ++l)
    for (int c = 0; c < n; ++c)
      cs.h_haps_ris(static_cast<std::size_t>(l), static_cast<std::size_t>(c)) =
          haps_ris_amp * a_panel[static_cast<std::size_t>(l)] *
          std::conj(a_haps[static_cast<std::size_t>(c)]);
  if (cfg.channel_perturb_std > 0.0) {
    for (auto& z : cs.h_haps_ris.data())
      z += rng.complex_gaussian(cfg.channel_perturb_std * cfg.channel_perturb_std);
  }

  const auto angles = user_angles(cfg, layout);
  const ComplexMatrix theta = ris_reflection_matrix(profile);

  cs.h_direct = ComplexMatrix(static_cast<std::size_t>(cfg.k_ue), static_cast<std::size_t>(n));
  cs.g_users.resize(static_cast<std::size_t>(cfg.k_ue));
  cs.h_composite =
      ComplexMatrix(static_cast<std::size_t>(cfg.n_streams()), static_cast<std::size_t>(n));

  for (int s = 0; s < cfg.k_sat; ++s)
    for (int c = 0; c < n; ++c)
      cs.h_composite(static_cast<std::size_t>(s), static_cast<std::size_t>(c)) =
          cs.h_ul(static_cast<std::size_t>(s), static_cast<std::size_t>(c));

  const double backlobe_amp = std::sqrt(cfg.backlobe_gain);
  for (int k = 0; k < cfg.k_ue; ++k) {
    auto g = ris_departure_vector(geom.user_bearing_rad[static_cast<std::size_t>(k)], cfg);
    if (cfg.apply_pathloss) {
      const double dx = layout.positions[static_cast<std::size_t>(k)][0] - cfg.ris_position_m[0];
      const double dy = layout.positions[static_cast<std::size_t>(k)][1] - cfg.ris_position_m[1];
      const double amp = free_space_amplitude(cfg, std::hypot(dx, dy));
      for (auto& z : g) z *= amp;
    }
    perturb(g, cfg.channel_perturb_std, rng);
    cs.g_users[static_cast<std::size_t>(k)] = g;

    auto a_user = steering_vector(angles[static_cast<std::size_t>(k)], n);
    double direct_amp = backlobe_amp;
    if (cfg.apply_pathloss) {
      const double slant =
          cfg.haps_height_m / std::cos(angles[static_cast<std::size_t>(k)]);
      direct_amp *= free_space_amplitude(cfg, slant);
    }
    std::vector<cplx> direct_row(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c)
      direct_row[static_cast<std::size_t>(c)] =
          direct_amp * std::conj(a_user[static_cast<std::size_t>(c)]);
    perturb(direct_row, cfg.channel_perturb_std, rng);
    for (int c = 0; c < n; ++c)
      cs.h_direct(static_cast<std::size_t>(k), static_cast<std::size_t>(c)) =
          direct_row[static_cast<std::size_t>(c)];

    // h_DL,k^H = g_k^H Theta H_h + h_{h,k}^H
    for (int c = 0; c < n; ++c) {
      cplx acc(0.0, 0.0);
      for (int l = 0; l < l2; ++l)
        acc += std::conj(g[static_cast<std::size_t>(l)]) *
               theta(static_cast<std::size_t>(l), static_cast<std::size_t>(l)) *
               cs.h_haps_ris(static_cast<std::size_t>(l), static_cast<std::size_t>(c));
      cs.h_composite(static_cast<std::size_t>(cfg.k_sat + k), static_cast<std::size_t>(c)) =
          acc + direct_row[static_cast<std::size_t>(c)];
    }
  }

  if (!cs.h_composite.all_finite())
    throw std::runtime_error("build_channels: non-finite composite channel");
  return cs;
}

std::string channel_set_to_json(const ChannelSet& cs) {
  using nlohmann::json;
  auto matrix_json = [](const ComplexMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < m.cols(); ++c)
        row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  json j;
  j["h_ul"] = matrix_json(cs.h_ul);
  j["h_haps_ris"] = matrix_json(cs.h_haps_ris);
  j["h_direct"] = matrix_json(cs.h_direct);
  j["h_composite"] = matrix_json(cs.h_composite);
  json users = json::array();
  for (const auto& g : cs.g_users) {
    json v = json::array();
    for (const cplx& z : g) v.push_back(json::array({z.real(), z.imag()}));
    users.push_back(std::move(v));
  }
  j["g_users"] = users;
  return j.dump(2);
}

}  // namespace sagin
