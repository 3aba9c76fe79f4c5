#include <doctest.h>

#include <cmath>

#include "wproj/instances.hpp"
#include "wproj/ot.hpp"
#include "wproj/rng.hpp"
#include "wproj/shadow.hpp"

using namespace wproj;

namespace {

DiscreteMeasure points_1d(std::vector<double> xs, std::vector<double> ws = {}) {
  if (ws.empty()) ws.assign(xs.size(), 1.0 / static_cast<double>(xs.size()));
  return DiscreteMeasure::from_flat(1, std::move(xs), std::move(ws));
}

ProductMeasure diag_rho() {
  return ProductMeasure(
      DiscreteMeasure::from_flat(2, {0.0, 0.0, 1.0, 1.0}, {0.5, 0.5}),
      MetricSpec(2.0, {1, 1}));
}

// Verifies the reconstruction identity kappa(x|y) * rho_i(y) == plan entry.
void check_reconstruction(const ConditionalKernel& k, const TransportPlan& plan) {
  for (std::size_t j = 0; j < k.rows.size(); ++j) {
    std::vector<double> rebuilt(plan.rows(), 0.0);
    for (const auto& [i, prob] : k.rows[j]) {
      rebuilt[i] = prob * k.conditioning.weight(j);
    }
    for (std::size_t i = 0; i < plan.rows(); ++i) {
      CHECK(std::abs(rebuilt[i] - plan.at(i, j)) <= 1e-12);
    }
  }
}

}  // namespace

TEST_CASE("disintegrate: identity, product, and uniform plans") {
  MetricSpec spec(2.0, {1});
  DiscreteMeasure m = points_1d({0.0, 1.0});

  // Diagonal plan -> identity kernel.
  OTResult identity = solve_ot(m, m, spec);
  ConditionalKernel k1 = disintegrate(identity.plan);
  for (std::size_t j = 0; j < 2; ++j) {
    REQUIRE(k1.rows[j].size() == 1);
    CHECK(k1.rows[j][0].first == j);
    CHECK(k1.rows[j][0].second == doctest::Approx(1.0).epsilon(1e-14));
  }
  check_reconstruction(k1, identity.plan);

  // Product plan delta_a x rho: every row Dirac at a.
  OTResult product = solve_ot(points_1d({0.25}), m, spec);
  ConditionalKernel k2 = disintegrate(product.plan);
  for (std::size_t j = 0; j < 2; ++j) {
    REQUIRE(k2.rows[j].size() == 1);
    CHECK(k2.rows[j][0].first == 0);
  }
  check_reconstruction(k2, product.plan);

  // Uniform 2x2 plan: every row (.5, .5).
  TransportPlan flat(m, m, {0.25, 0.25, 0.25, 0.25});
  ConditionalKernel k3 = disintegrate(flat);
  for (std::size_t j = 0; j < 2; ++j) {
    REQUIRE(k3.rows[j].size() == 2);
    CHECK(k3.rows[j][0].second == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(k3.rows[j][1].second == doctest::Approx(0.5).epsilon(1e-14));
  }
  check_reconstruction(k3, flat);
}

TEST_CASE("shadow of the worked two-atom instance") {
  ProductMeasure rho = diag_rho();
  MarginalVector mu{{points_1d({0.0, 1.0}), points_1d({0.5})}};
  MetricSpec spec(2.0, {1, 1});
  ShadowResult s = compose_shadow(rho, mu, spec);

  CHECK(s.value == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(s.shadow.base.size() == 2);
  CHECK(s.shadow.base.find_atom(Point{0.0, 0.5}) >= 0);
  CHECK(s.shadow.base.find_atom(Point{1.0, 0.5}) >= 0);
  CHECK(s.shadow.base.weight(0) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(s.per_marginal_values[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.per_marginal_values[1] == doctest::Approx(0.5).epsilon(1e-12));

  // Feasibility: the shadow lies in Pi(mu).
  for (int i = 0; i < 2; ++i) {
    CHECK(marginal(s.shadow, i).approx_equal(mu.components[static_cast<std::size_t>(i)], 1e-9));
  }
}

TEST_CASE("idempotence: rho already in Pi(mu)") {
  ProductMeasure rho = diag_rho();
  MarginalVector mu = marginals_of(rho);
  ShadowResult s = compose_shadow(rho, mu, rho.spec);
  CHECK(s.value == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(s.shadow.base.approx_equal(rho.base, 1e-12));
  MapInducedResult mi = is_map_induced(s);
  CHECK(mi.is_map);
  for (const auto& map : mi.maps) {
    for (std::size_t j = 0; j < map.size(); ++j) CHECK(map[j] == j);
  }
}

TEST_CASE("dirac marginals absorb any rho") {
  InstanceParams params;
  for (int inst = 0; inst < 5; ++inst) {
    ProductMeasure rho = random_product_measure(params, 2.0, mix_seed(0x51, inst));
    MarginalVector mu{{points_1d({0.3}), points_1d({-0.7})}};
    ShadowResult s = compose_shadow(rho, mu, MetricSpec(2.0, rho.spec.block_dims));
    REQUIRE(s.shadow.base.size() == 1);
    CHECK(s.shadow.base.atom(0)[0] == 0.3);
    CHECK(s.shadow.base.atom(0)[1] == -0.7);
    CHECK(s.shadow.base.weight(0) == doctest::Approx(1.0).epsilon(1e-12));
    MapInducedResult mi = is_map_induced(s);
    CHECK(mi.is_map);  // constant maps
  }
}

TEST_CASE("splitting atoms cannot be map-induced") {
  // rho_i = delta_0 must split onto uniform{-1, 1}.
  ProductMeasure rho(DiscreteMeasure::from_flat(2, {0.0, 0.0}, {1.0}),
                     MetricSpec(2.0, {1, 1}));
  MarginalVector mu{{points_1d({-1.0, 1.0}), points_1d({0.0})}};
  ShadowResult s = compose_shadow(rho, mu, rho.spec);
  MapInducedResult mi = is_map_induced(s);
  CHECK_FALSE(mi.is_map);
  CHECK(mi.maps.empty());
  CHECK(s.shadow.base.size() == 2);
}

TEST_CASE("map-induced shadows equal the pushforward exactly") {
  // Strictly increasing weights force deterministic monotone plans in 1-D.
  ProductMeasure rho(
      DiscreteMeasure::from_flat(2, {0.0, 0.0, 0.5, 0.5, 1.0, 1.0}, {0.2, 0.3, 0.5}),
      MetricSpec(2.0, {1, 1}));
  MarginalVector mu{{points_1d({0.1, 0.6, 1.1}, {0.2, 0.3, 0.5}),
                     points_1d({-0.1, 0.4, 0.9}, {0.2, 0.3, 0.5})}};
  ShadowResult s = compose_shadow(rho, mu, rho.spec);
  MapInducedResult mi = is_map_induced(s);
  REQUIRE(mi.is_map);
  // Pushforward of rho under the per-block maps.
  std::vector<double> coords;
  std::vector<double> weights;
  auto rho1 = marginal_with_index(rho, 0);
  auto rho2 = marginal_with_index(rho, 1);
  for (std::size_t a = 0; a < rho.base.size(); ++a) {
    std::size_t j1 = rho1.second[a], j2 = rho2.second[a];
    coords.push_back(mu.components[0].atom(mi.maps[0][j1])[0]);
    coords.push_back(mu.components[1].atom(mi.maps[1][j2])[0]);
    weights.push_back(rho.base.weight(a));
  }
  DiscreteMeasure pushed = DiscreteMeasure::from_flat(2, std::move(coords), std::move(weights));
  CHECK(s.shadow.base.approx_equal(pushed, 1e-12));
}

TEST_CASE("glued coupling marginals and cost") {
  InstanceParams params;
  for (double p : {1.0, 1.5, 2.0}) {
    MetricSpec spec(p, {1, 1});
    for (int inst = 0; inst < 8; ++inst) {
      ProductMeasure rho = random_product_measure(params, p, mix_seed(0x61, inst, 0));
      MarginalVector mu = random_marginal_vector(params, mix_seed(0x61, inst, 1));
      ShadowResult s = compose_shadow(rho, mu, spec);

      // x-marginal of glued = shadow, y-marginal = rho.
      std::vector<double> xm(s.shadow.base.size(), 0.0);
      std::vector<double> ym(rho.base.size(), 0.0);
      for (const GluedEntry& e : s.glued) {
        xm[e.x] += e.mass;
        ym[e.y] += e.mass;
      }
      for (std::size_t i = 0; i < xm.size(); ++i) {
        CHECK(std::abs(xm[i] - s.shadow.base.weight(i)) <= 1e-9);
      }
      for (std::size_t y = 0; y < ym.size(); ++y) {
        CHECK(std::abs(ym[y] - rho.base.weight(y)) <= 1e-9);
      }

      // Cost of the glued coupling certifies the value.
      double cost = 0.0;
      for (const GluedEntry& e : s.glued) {
        cost += e.mass * ground_cost(s.shadow.base.atom(e.x), rho.base.atom(e.y), spec);
      }
      CHECK(std::abs(std::pow(cost, 1.0 / p) - s.value) <= 1e-9);

      // Feasibility.
      for (int i = 0; i < 2; ++i) {
        DiscreteMeasure got = marginal(s.shadow, i);
        const DiscreteMeasure& want = mu.components[static_cast<std::size_t>(i)];
        REQUIRE(got.size() == want.size());
        double tv = 0.0;
        for (std::size_t a = 0; a < want.size(); ++a) {
          auto idx = got.find_atom(want.atom(a));
          REQUIRE(idx >= 0);
          tv += std::abs(got.weight(static_cast<std::size_t>(idx)) - want.weight(a));
        }
        CHECK(tv <= 1e-9);
      }
    }
  }
}

TEST_CASE("glued coupling certifies the bottleneck value for p = inf") {
  InstanceParams params;
  MetricSpec spec(kInf, {1, 1});
  for (int inst = 0; inst < 6; ++inst) {
    ProductMeasure rho = random_product_measure(params, kInf, mix_seed(0x71, inst, 0));
    MarginalVector mu = random_marginal_vector(params, mix_seed(0x71, inst, 1));
    ShadowResult s = compose_shadow(rho, mu, spec);
    double worst = 0.0;
    for (const GluedEntry& e : s.glued) {
      worst = std::max(worst, ground_distance(s.shadow.base.atom(e.x),
                                              rho.base.atom(e.y), spec));
    }
    CHECK(std::abs(worst - s.value) <= 1e-9);
  }
}

TEST_CASE("support cap rejects exploding compositions") {
  ProductMeasure rho = diag_rho();
  MarginalVector mu{{points_1d({0.0, 1.0}), points_1d({0.5})}};
  CHECK_THROWS_AS(compose_shadow(rho, mu, rho.spec, 1), SizeError);
}
