#include "uavisac/exact_model.hpp"
#include "uavisac/scenario.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace uavisac;

TEST_CASE("geometry helpers") {
  ScenarioConfig cfg = testing::default_config();
  double d = exact::distance(cfg.depot, cfg.target, cfg.altitude_m);
  CHECK(d * d == doctest::Approx(51600.0).epsilon(1e-14));

  auto a = exact::steering(cfg.depot, cfg.target, cfg.altitude_m, cfg.num_antennas);
  REQUIRE(a.size() == 8);
  double nrm = 0;
  for (auto& c : a) nrm += std::norm(c);
  CHECK(nrm == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(std::abs(a[0] - exact::cd(1.0, 0.0)) < 1e-15);
}

TEST_CASE("aligned beam powers at the depot") {
  ScenarioConfig cfg = testing::default_config();
  double p = cfg.uav_power_cap_w;
  CHECK(exact::echo_power(cfg, cfg.depot, p) ==
        doctest::Approx(1.9229613604951627e-13).epsilon(1e-12));
  CHECK(exact::loopback_power(cfg, cfg.depot, p) ==
        doctest::Approx(2.7724538437136525e-13).epsilon(1e-12));
}

TEST_CASE("echo power matches the closed form everywhere") {
  ScenarioConfig cfg = testing::default_config();
  DerivedConstants dc = derive_constants(cfg);
  std::mt19937 rng(11);
  for (int i = 0; i < 200; ++i) {
    Vec2 q = testing::random_point_near(rng, cfg.target, 900.0);
    double p = testing::uniform(rng, 1e-4, cfg.uav_power_cap_w);
    double d2 = norm_sq(q - cfg.target) + cfg.altitude_m * cfg.altitude_m;
    double closed = dc.lambda_t * cfg.num_antennas * p / (d2 * d2);
    CHECK(exact::echo_power(cfg, q, p) == doctest::Approx(closed).epsilon(1e-10));
  }
}

TEST_CASE("loopback power is position independent and linear in power") {
  ScenarioConfig cfg = testing::default_config();
  double base = exact::loopback_power(cfg, cfg.depot, 0.01);
  std::mt19937 rng(12);
  for (int i = 0; i < 50; ++i) {
    Vec2 q = testing::random_point_near(rng, cfg.depot, 2000.0);
    // steering phases change with q, but the quadratic form's scale does not
    double v = exact::loopback_power(cfg, q, 0.01);
    CHECK(v <= cfg.si_coeff * cfg.num_antennas * 0.01 * (1 + 1e-12));
    CHECK(v > 0.0);
  }
  CHECK(exact::loopback_power(cfg, cfg.depot, 0.02) == doctest::Approx(2 * base).epsilon(1e-12));
}

TEST_CASE("uplink SINR at the depot, frozen value") {
  ScenarioConfig cfg = testing::default_config();
  CHECK(exact::exact_comm_sinr(cfg, cfg.depot, cfg.uav_power_cap_w, 0) ==
        doctest::Approx(0.027101057015608502).epsilon(1e-12));
}

TEST_CASE("uplink SINR falls when the beam power rises") {
  ScenarioConfig cfg = testing::default_config();
  for (int k = 0; k < cfg.num_devices; ++k) {
    double lo = exact::exact_comm_sinr(cfg, cfg.depot, 0.005, k);
    double hi = exact::exact_comm_sinr(cfg, cfg.depot, cfg.uav_power_cap_w, k);
    CHECK(hi < lo);
    CHECK(hi > 0.0);
  }
}

TEST_CASE("echo SINR: a transmitting device only hurts") {
  ScenarioConfig cfg = testing::default_config();
  std::mt19937 rng(13);
  for (int i = 0; i < 50; ++i) {
    Vec2 q = testing::random_point_near(rng, cfg.target, 600.0);
    double p = testing::uniform(rng, 1e-3, cfg.uav_power_cap_w);
    double silent = exact::exact_radar_sinr(cfg, q, p, -1);
    for (int k = 0; k < cfg.num_devices; ++k) {
      double busy = exact::exact_radar_sinr(cfg, q, p, k);
      CHECK(busy <= silent * (1 + 1e-12));
    }
  }
}

TEST_CASE("zero beam power gives zero echo and leakage") {
  ScenarioConfig cfg = testing::default_config();
  CHECK(exact::echo_power(cfg, cfg.depot, 0.0) == 0.0);
  CHECK(exact::loopback_power(cfg, cfg.depot, 0.0) == 0.0);
  CHECK(exact::exact_radar_sinr(cfg, cfg.depot, 0.0, -1) == 0.0);
}
