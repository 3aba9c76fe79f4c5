#include <doctest.h>

#include <cmath>

#include "oracle_utils.hpp"
#include "wproj/instances.hpp"
#include "wproj/mot.hpp"
#include "wproj/rng.hpp"
#include "wproj/shadow.hpp"

using namespace wproj;

namespace {

DiscreteMeasure points_1d(std::vector<double> xs, std::vector<double> ws = {}) {
  if (ws.empty()) ws.assign(xs.size(), 1.0 / static_cast<double>(xs.size()));
  return DiscreteMeasure::from_flat(1, std::move(xs), std::move(ws));
}

}  // namespace

TEST_CASE("projection LP shape for supports 2/1/2") {
  ProductMeasure rho(DiscreteMeasure::from_flat(2, {0.0, 0.0, 1.0, 1.0}, {0.5, 0.5}),
                     MetricSpec(2.0, {1, 1}));
  MarginalVector mu{{points_1d({0.0, 1.0}), points_1d({0.5})}};
  ProjectionLp plp = build_projection_lp(rho, mu, MetricSpec(2.0, {1, 1}));
  CHECK(plp.lp.num_vars == 4);            // (2*1) x-combos times 2 rho atoms
  CHECK(plp.lp.rows.size() == 2 + 1 + 1);  // mu rows + rho rows minus dropped last
  CHECK(plp.num_x == 2);
  CHECK(plp.num_y == 2);
}

TEST_CASE("LP optimum is zero when rho is product-supported with mu marginals") {
  ProductMeasure rho(
      DiscreteMeasure::from_flat(2, {0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0},
                                 {0.25, 0.25, 0.25, 0.25}),
      MetricSpec(2.0, {1, 1}));
  MarginalVector mu = marginals_of(rho);
  ProjectionCertificate cert = project_oracle(rho, mu, MetricSpec(2.0, {1, 1}));
  CHECK(cert.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cert.distance == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("worked two-atom instance: optimum 0.25 cost units at p = 2") {
  ProductMeasure rho(DiscreteMeasure::from_flat(2, {0.0, 0.0, 1.0, 1.0}, {0.5, 0.5}),
                     MetricSpec(2.0, {1, 1}));
  MarginalVector mu{{points_1d({0.0, 1.0}), points_1d({0.5})}};
  MetricSpec spec(2.0, {1, 1});

  ProjectionLp plp = build_projection_lp(rho, mu, spec);
  auto brute = testing::brute_force_lp_min(plp.lp);
  REQUIRE(brute.has_value());
  CHECK(*brute == doctest::Approx(0.25).epsilon(1e-12));

  ProjectionCertificate cert = project_oracle(rho, mu, spec);
  CHECK(cert.value == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(cert.distance == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(cert.gap <= 1e-8);
}

TEST_CASE("solve_lp agrees with exhaustive basic-solution enumeration") {
  InstanceParams params;
  params.max_marginal_atoms = 3;
  params.max_rho_atoms = 3;
  for (double p : {1.0, 1.5, 2.0}) {
    MetricSpec spec(p, {1, 1});
    for (int inst = 0; inst < 6; ++inst) {
      ProductMeasure rho = random_product_measure(params, p, mix_seed(0x91, inst, 0));
      MarginalVector mu = random_marginal_vector(params, mix_seed(0x91, inst, 1));
      ProjectionLp plp = build_projection_lp(rho, mu, spec);
      LpSolution sol = solve_lp(plp.lp);
      auto brute = testing::brute_force_lp_min(plp.lp);
      REQUIRE(brute.has_value());
      CHECK(std::abs(sol.value - *brute) <= 1e-8);
      CHECK(sol.gap <= 1e-8);
    }
  }
}

TEST_CASE("oracle equals shadow value (the optimal values are equal)") {
  InstanceParams params;
  for (double p : {1.0, 1.5, 2.0}) {
    MetricSpec spec(p, {1, 1});
    for (int inst = 0; inst < 25; ++inst) {
      ProductMeasure rho = random_product_measure(params, p, mix_seed(0xA1, inst, 0));
      MarginalVector mu = random_marginal_vector(params, mix_seed(0xA1, inst, 1));
      ShadowResult s = compose_shadow(rho, mu, spec);
      ProjectionCertificate cert = project_oracle(rho, mu, spec);
      CHECK(std::abs(s.value - cert.distance) <= 1e-7);
    }
  }
}

TEST_CASE("p = inf oracle via threshold search") {
  InstanceParams params;
  MetricSpec spec(kInf, {1, 1});
  for (int inst = 0; inst < 10; ++inst) {
    ProductMeasure rho = random_product_measure(params, kInf, mix_seed(0xB1, inst, 0));
    MarginalVector mu = random_marginal_vector(params, mix_seed(0xB1, inst, 1));
    ShadowResult s = compose_shadow(rho, mu, spec);
    ProjectionCertificate cert = project_oracle(rho, mu, spec);
    CHECK(std::abs(s.value - cert.distance) <= 1e-7);
  }
}

TEST_CASE("oracle value vanishes iff rho couples mu") {
  // rho in Pi(mu): projection value 0.
  ProductMeasure rho(
      DiscreteMeasure::from_flat(2, {0.0, 0.5, 1.0, 0.5}, {0.4, 0.6}),
      MetricSpec(2.0, {1, 1}));
  MarginalVector mu = marginals_of(rho);
  ProjectionCertificate cert = project_oracle(rho, mu, MetricSpec(2.0, {1, 1}));
  CHECK(cert.distance <= 1e-9);

  // Perturbed marginals: strictly positive value.
  MarginalVector nu{{points_1d({0.1, 1.0}, {0.4, 0.6}), mu.components[1]}};
  ProjectionCertificate cert2 = project_oracle(rho, nu, MetricSpec(2.0, {1, 1}));
  CHECK(cert2.distance > 1e-6);
}

TEST_CASE("dirac marginals give the closed-form value") {
  InstanceParams params;
  MetricSpec spec(2.0, {1, 1});
  for (int inst = 0; inst < 5; ++inst) {
    ProductMeasure rho = random_product_measure(params, 2.0, mix_seed(0xC1, inst));
    MarginalVector mu{{points_1d({0.25}), points_1d({0.75})}};
    ProjectionCertificate cert = project_oracle(rho, mu, spec);
    double expect = 0.0;
    Point a{0.25, 0.75};
    for (std::size_t y = 0; y < rho.base.size(); ++y) {
      expect += rho.base.weight(y) * ground_cost(a, rho.base.atom(y), spec);
    }
    CHECK(cert.value == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("variable cap raises a size error") {
  InstanceParams params;
  ProductMeasure rho = random_product_measure(params, 2.0, 5);
  MarginalVector mu = random_marginal_vector(params, 6);
  CHECK_THROWS_AS(build_projection_lp(rho, mu, MetricSpec(2.0, {1, 1}), 1), SizeError);
}

TEST_CASE("dual feasibility and nonnegative duality gap on random instances") {
  InstanceParams params;
  MetricSpec spec(1.5, {1, 1});
  for (int inst = 0; inst < 10; ++inst) {
    ProductMeasure rho = random_product_measure(params, 1.5, mix_seed(0xD1, inst, 0));
    MarginalVector mu = random_marginal_vector(params, mix_seed(0xD1, inst, 1));
    ProjectionLp plp = build_projection_lp(rho, mu, spec);
    LpSolution sol = solve_lp(plp.lp);
    CHECK(sol.gap <= 1e-8);
    CHECK(sol.value >= -1e-12);
  }
}
