#include <doctest.h>

#include <cmath>

#include "sagin/scenario.hpp"

using namespace sagin;

TEST_CASE("place_users poisson density matches the configured mean") {
  GeometryConfig cfg;  // 100 x 100 m
  UserDistSpec dist;   // poisson, 150 users/km^2 -> lambda = 1.5
  double total = 0.0;
  const int draws = 4000;
  Rng rng(11, 0);
  for (int i = 0; i < draws; ++i) {
    // Retries on zero draws bias the count upward; accept the conditional
    // mean E[K | K >= 1] = lambda / (1 - exp(-lambda)).
    total += place_users(cfg, dist, rng).count();
  }
  const double lambda = 1.5;
  const double conditional_mean = lambda / (1.0 - std::exp(-lambda));
  CHECK(total / draws == doctest::Approx(conditional_mean).epsilon(0.05));
}

TEST_CASE("place_users fixed count stays in bounds") {
  GeometryConfig cfg;
  UserDistSpec dist;
  dist.kind = UserDistribution::kUniform;
  dist.fixed_count = 4;
  Rng rng(3, 0);
  const UserLayout layout = place_users(cfg, dist, rng);
  REQUIRE(layout.count() == 4);
  for (const auto& p : layout.positions) {
    CHECK(p[0] >= 0.0);
    CHECK(p[0] <= cfg.area_x_m);
    CHECK(p[1] >= 0.0);
    CHECK(p[1] <= cfg.area_y_m);
  }
}

TEST_CASE("place_users normal mode concentrates at the area centre") {
  GeometryConfig cfg;
  UserDistSpec dist;
  dist.kind = UserDistribution::kNormal;
  dist.fixed_count = 10000;
  Rng rng(5, 0);
  const UserLayout layout = place_users(cfg, dist, rng);
  double mx = 0.0, my = 0.0;
  for (const auto& p : layout.positions) {
    mx += p[0];
    my += p[1];
    CHECK(p[0] >= 0.0);
    CHECK(p[0] <= cfg.area_x_m);
  }
  mx /= layout.count();
  my /= layout.count();
  CHECK(std::abs(mx - 50.0) < 2.0);
  CHECK(std::abs(my - 50.0) < 2.0);
}

TEST_CASE("place_users determinism and zero-user failure") {
  GeometryConfig cfg;
  UserDistSpec dist;
  Rng a(17, 2), b(17, 2);
  const UserLayout la = place_users(cfg, dist, a);
  const UserLayout lb = place_users(cfg, dist, b);
  REQUIRE(la.count() == lb.count());
  for (int i = 0; i < la.count(); ++i) {
    CHECK(la.positions[i][0] == lb.positions[i][0]);
    CHECK(la.positions[i][1] == lb.positions[i][1]);
  }

  UserDistSpec empty;
  empty.density_per_km2 = 1.0e-12;  // lambda ~ 1e-14: every draw is zero
  Rng rng(1, 0);
  CHECK_THROWS_AS(place_users(cfg, empty, rng), std::runtime_error);
}

TEST_CASE("user_angles: nadir, 45-degree offset, and scalar oracle") {
  GeometryConfig cfg;
  UserLayout layout;
  layout.positions.push_back({50.0, 50.0});  // centre -> 0
  CHECK(user_angles(cfg, layout)[0] == doctest::Approx(0.0));

  GeometryConfig wide = cfg;
  wide.area_x_m = 60000.0;
  wide.area_y_m = 60000.0;
  UserLayout offset;
  offset.positions.push_back({30000.0 + 20000.0, 30000.0});  // 20 km east, 20 km up
  CHECK(user_angles(wide, offset)[0] == doctest::Approx(kPi / 4.0).epsilon(1e-12));

  Rng rng(7, 0);
  UserDistSpec dist;
  dist.kind = UserDistribution::kUniform;
  dist.fixed_count = 50;
  const UserLayout random_layout = place_users(cfg, dist, rng);
  const auto angles = user_angles(cfg, random_layout);
  for (int i = 0; i < random_layout.count(); ++i) {
    const double dx = random_layout.positions[i][0] - 50.0;
    const double dy = random_layout.positions[i][1] - 50.0;
    const double expected = (dx < 0.0 || (dx == 0.0 && dy < 0.0) ? -1.0 : 1.0) *
                            std::atan(std::hypot(dx, dy) / cfg.haps_height_m);
    CHECK(angles[i] == doctest::Approx(expected).epsilon(1e-15));
    CHECK(angles[i] > -kPi / 2.0);
    CHECK(angles[i] < kPi / 2.0);
  }
}

TEST_CASE("noise_power reference values") {
  NoiseModel nm;  // NF 7 dB
  const double sigma2 = noise_power(nm, 400.0e6);
  CHECK(watts_to_dbm(sigma2) == doctest::Approx(-80.98).epsilon(1e-4));
  CHECK(sigma2 == doctest::Approx(7.98e-12).epsilon(1e-3));

  NoiseModel flat{-174.0, 0.0};
  CHECK(watts_to_dbm(noise_power(flat, 1.0)) == doctest::Approx(-174.0));

  const double one = watts_to_dbm(noise_power(nm, 200.0e6));
  const double two = watts_to_dbm(noise_power(nm, 400.0e6));
  CHECK(two - one == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("noise_power is monotone in bandwidth and noise figure") {
  NoiseModel nm;
  CHECK(noise_power(nm, 2.0e6) > noise_power(nm, 1.0e6));
  NoiseModel hot{-174.0, 9.0};
  CHECK(noise_power(hot, 1.0e6) > noise_power(nm, 1.0e6));
  CHECK_THROWS_AS(noise_power(nm, 0.0), std::invalid_argument);
}

TEST_CASE("geometry validation rejects nonpositive parameters") {
  GeometryConfig cfg;
  cfg.bandwidth_hz = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  GeometryConfig cfg2;
  cfg2.k_ue = 0;
  CHECK_THROWS_AS(cfg2.validate(), std::invalid_argument);

  GeometryConfig feasible;
  feasible.n_antennas = 50;
  feasible.k_sat = 1;
  feasible.k_ue = 49;
  CHECK(feasible.zf_feasible());
  feasible.k_ue = 50;
  CHECK_FALSE(feasible.zf_feasible());
  feasible.validate();  // infeasibility is not a constructor error
}
