#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "polaron/model.hpp"
#include "polaron/rng.hpp"

using namespace polaron;

TEST_CASE("dimensionless couplings: direct substitutions") {
  ModelParams p{1.0, 2.0, 1.0, 0.0, 8};
  const CouplingPoint c = to_dimensionless(p);
  CHECK(c.lambda_ssh == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.lambda_h == 0.0);
  CHECK(c.adiabaticity == doctest::Approx(0.5).epsilon(1e-14));

  ModelParams free_particle{1.0, 4.0, 0.0, 0.0, 8};
  const CouplingPoint c2 = to_dimensionless(free_particle);
  CHECK(c2.lambda_ssh == 0.0);
  CHECK(c2.lambda_h == 0.0);
  CHECK(c2.adiabaticity == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("coupling inversion") {
  // lambda_ssh = 1.117 at omega = 0.5, t = 1
  ModelParams p = from_dimensionless({1.117, 0.0, 0.0}, 1.0, 0.5, 32);
  CHECK(p.alpha_ssh == doctest::Approx(std::sqrt(1.117 * 0.5 / 2.0)).epsilon(1e-12));
  CHECK(to_dimensionless(p).lambda_ssh == doctest::Approx(1.117).epsilon(1e-14));

  ModelParams z = from_dimensionless({0.0, 0.0, 0.0}, 1.0, 1.0, 8);
  CHECK(z.alpha_ssh == 0.0);
  CHECK(z.alpha_h == 0.0);

  ModelParams s = from_dimensionless({1.0, 0.0, 0.0}, 1.0, 2.0, 8);
  CHECK(s.alpha_ssh == doctest::Approx(1.0).epsilon(1e-14));

  ModelParams h = from_dimensionless({0.0, 0.5, 0.0}, 1.0, 3.7, 8);
  CHECK(h.alpha_h == doctest::Approx(std::sqrt(3.7)).epsilon(1e-12));
  CHECK(h.alpha_h == doctest::Approx(1.92354).epsilon(1e-5));
}

TEST_CASE("round trip over 1000 random parameter sets") {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    ModelParams p;
    p.t = rng.uniform(0.1, 3.0);
    p.omega = rng.uniform(0.05, 8.0);
    p.alpha_ssh = rng.uniform(0.0, 3.0);
    p.alpha_h = rng.uniform(0.0, 3.0);
    p.ring_size = 4 + 2 * static_cast<int>(rng.integer(20));
    const CouplingPoint c = to_dimensionless(p);
    const ModelParams q = from_dimensionless(c, p.t, p.omega, p.ring_size);
    CHECK(q.alpha_ssh == doctest::Approx(p.alpha_ssh).epsilon(1e-14));
    CHECK(q.alpha_h == doctest::Approx(p.alpha_h).epsilon(1e-14));
    const CouplingPoint c2 = to_dimensionless(q);
    CHECK(c2.lambda_ssh == doctest::Approx(c.lambda_ssh).epsilon(1e-14));
    CHECK(c2.lambda_h == doctest::Approx(c.lambda_h).epsilon(1e-14));
  }
}

TEST_CASE("lambda_ssh strictly increases with alpha_ssh") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    ModelParams p;
    p.t = rng.uniform(0.1, 3.0);
    p.omega = rng.uniform(0.1, 8.0);
    p.alpha_ssh = rng.uniform(0.0, 3.0);
    p.ring_size = 8;
    ModelParams q = p;
    q.alpha_ssh = p.alpha_ssh + rng.uniform(1e-6, 1.0);
    CHECK(to_dimensionless(q).lambda_ssh > to_dimensionless(p).lambda_ssh);
  }
}

TEST_CASE("error paths") {
  ModelParams atomic{0.0, 1.0, 0.0, 1.0, 8};
  CHECK_THROWS_AS(to_dimensionless(atomic), std::domain_error);
  CHECK_THROWS_AS(from_dimensionless({-0.1, 0.0, 0.0}, 1.0, 1.0, 8),
                  std::domain_error);
  CHECK_THROWS_AS(from_dimensionless({1.0, 0.0, 0.0}, 0.0, 1.0, 8),
                  std::domain_error);
  ModelParams bad_ring{1.0, 1.0, 0.0, 0.0, 6 + 1};
  CHECK_THROWS(bad_ring.validate());
}

TEST_CASE("json round trip uses the dimensionless schema") {
  ModelParams p = from_dimensionless({0.8, 0.25, 0.0}, 1.0, 1.5, 16);
  const nlohmann::json j = params_to_json(p);
  CHECK(j.at("lambda_ssh").get<double>() == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(j.at("lambda_h").get<double>() == doctest::Approx(0.25).epsilon(1e-14));
  const ModelParams q = params_from_json(j);
  CHECK(q.alpha_ssh == doctest::Approx(p.alpha_ssh).epsilon(1e-14));
  CHECK(q.alpha_h == doctest::Approx(p.alpha_h).epsilon(1e-14));
  CHECK(q.ring_size == 16);
}
