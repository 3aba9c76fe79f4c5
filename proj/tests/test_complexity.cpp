#include <doctest.h>

#include <cmath>

#include "wproj/complexity.hpp"
#include "wproj/instances.hpp"
#include "wproj/rng.hpp"

using namespace wproj;

namespace {

// 16x16 grid on [0,1]^2 with spacing 1/15.
DiscreteMeasure grid16() {
  std::vector<double> coords;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      coords.push_back(i / 15.0);
      coords.push_back(j / 15.0);
    }
  }
  std::vector<double> w(256, 1.0 / 256.0);
  return DiscreteMeasure::from_flat(2, std::move(coords), std::move(w));
}

// Exact covering count of an n x n grid with spacing h by l_inf balls of
// diameter eps: each ball covers floor(eps/h)+1 consecutive points per axis.
std::size_t exact_grid_cover_inf(int n, double h, double eps) {
  int per_axis = static_cast<int>(std::floor(eps / h + 1e-12)) + 1;
  std::size_t lines = static_cast<std::size_t>((n + per_axis - 1) / per_axis);
  return lines * lines;
}

}  // namespace

TEST_CASE("covering basics") {
  MetricSpec norm(2.0, {1});
  DiscreteMeasure one = DiscreteMeasure::from_flat(1, {0.7}, {1.0});
  CoveringEstimate single = covering_number(one, 0.3, norm);
  CHECK(single.n_balls == 1);
  CHECK(single.d_eps == 0.0);

  DiscreteMeasure two = DiscreteMeasure::from_flat(1, {0.0, 1.0}, {0.5, 0.5});
  CHECK(covering_number(two, 0.4, norm).n_balls == 2);
  // A single ball of diameter 2.5 holds both.
  CHECK(covering_number(two, 2.5, norm).n_balls == 1);

  CHECK_THROWS_AS(covering_number(two, 0.0, norm), InputError);
}

TEST_CASE("greedy net against the exact grid cover (l_inf)") {
  DiscreteMeasure grid = grid16();
  MetricSpec norm(kInf, {2});
  const double h = 1.0 / 15.0;
  for (double eps : {0.15, 0.2, 0.3, 0.45, 0.6}) {
    CoveringEstimate est = covering_number(grid, eps, norm);
    std::size_t exact = exact_grid_cover_inf(16, h, eps);
    std::size_t exact_half = exact_grid_cover_inf(16, h, eps / 2.0);
    CHECK(est.n_balls >= exact);       // greedy never beats the optimum
    CHECK(est.n_balls <= exact_half);  // and is at most a factor-2 scale off
  }
}

TEST_CASE("grid dimension fit lands near 2") {
  DiscreteMeasure grid = grid16();
  MetricSpec norm(2.0, {2});
  // Log-spaced sweep (factor ~sqrt(2)) spanning half a decade above the grid
  // spacing 1/15.
  std::vector<double> epsilons{0.5, 0.35, 0.25, 0.18, 0.12};
  CoveringProfile prof = covering_profile(grid, epsilons, 0.0, norm);
  CHECK(std::abs(prof.dimension_fit.slope - 2.0) <= 0.3);
}

TEST_CASE("covering monotonicity") {
  MetricSpec norm(2.0, {2});
  DiscreteMeasure pts = random_measure(2, 40, 0.0, 1.0, 61);
  std::size_t prev = covering_number(pts, 0.1, norm).n_balls;
  for (double eps : {0.15, 0.2, 0.3, 0.5}) {
    std::size_t cur = covering_number(pts, eps, norm).n_balls;
    CHECK(cur <= prev);  // nonincreasing in epsilon
    prev = cur;
  }

  // Nondecreasing under adding points.
  DiscreteMeasure more = random_measure(2, 80, 0.0, 1.2, 62);
  std::vector<double> coords = pts.coords();
  std::vector<double> weights(pts.weights().size() + more.size(), 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) weights[i] = pts.weight(i) / 2.0;
  for (std::size_t i = 0; i < more.size(); ++i) {
    coords.push_back(more.atom(i)[0]);
    coords.push_back(more.atom(i)[1]);
    weights[pts.size() + i] = more.weight(i) / 2.0;
  }
  DiscreteMeasure merged = DiscreteMeasure::from_flat(2, std::move(coords), std::move(weights));
  for (double eps : {0.2, 0.35, 0.5}) {
    CHECK(covering_number(merged, eps, norm).n_balls >=
          covering_number(pts, eps, norm).n_balls);
  }
}

TEST_CASE("mass-drop covering") {
  MetricSpec norm(2.0, {1});
  DiscreteMeasure pts = random_measure(1, 20, 0.0, 1.0, 63);
  CoveringEstimate plain = covering_number(pts, 0.2, norm);
  CoveringEstimate tau0 = covering_with_mass_drop(pts, 0.2, 0.0, norm);
  CHECK(tau0.n_balls == plain.n_balls);

  // Heavy/light pair far apart: tau = 0.02 drops the light atom.
  DiscreteMeasure pair = DiscreteMeasure::from_flat(1, {0.0, 10.0}, {0.99, 0.01});
  CoveringEstimate dropped = covering_with_mass_drop(pair, 0.5, 0.02, norm);
  CHECK(dropped.n_balls == 1);

  // Grid plus 1% outliers: tau = 0.02 recovers the outlier-free count.
  MetricSpec norm2(2.0, {2});
  std::vector<double> coords;
  std::vector<double> weights;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      coords.push_back(i / 7.0);
      coords.push_back(j / 7.0);
      weights.push_back(0.99 / 64.0);
    }
  }
  coords.insert(coords.end(), {25.0, 25.0, -30.0, 40.0});
  weights.insert(weights.end(), {0.005, 0.005});
  DiscreteMeasure contaminated =
      DiscreteMeasure::from_flat(2, std::move(coords), std::move(weights));
  std::vector<double> clean_coords;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      clean_coords.push_back(i / 7.0);
      clean_coords.push_back(j / 7.0);
    }
  }
  DiscreteMeasure clean = DiscreteMeasure::from_flat(
      2, std::move(clean_coords), std::vector<double>(64, 1.0 / 64.0));
  CoveringEstimate with_drop = covering_with_mass_drop(contaminated, 0.4, 0.02, norm2);
  CoveringEstimate reference = covering_number(clean, 0.4, norm2);
  CHECK(with_drop.n_balls == reference.n_balls);

  // Always at most the plain covering.
  for (double eps : {0.2, 0.4}) {
    CHECK(covering_with_mass_drop(contaminated, eps, 0.02, norm2).n_balls <=
          covering_number(contaminated, eps, norm2).n_balls);
  }
  CHECK_THROWS_AS(covering_with_mass_drop(pair, 0.5, 1.0, norm), InputError);
}

TEST_CASE("rate_fit basics") {
  std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  std::vector<double> flat{2.0, 2.0, 2.0, 2.0};
  LineFit f0 = rate_fit(xs, flat);
  CHECK(f0.slope == 0.0);

  std::vector<double> line{-0.5 + 3.0, -1.0 + 3.0, -1.5 + 3.0, -2.0 + 3.0};
  LineFit f1 = rate_fit(xs, line);
  CHECK(f1.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f1.r2 == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(rate_fit(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}),
                  InputError);
  CHECK_THROWS_AS(rate_fit(std::vector<double>{1.0, 1.0, 1.0},
                           std::vector<double>{1.0, 2.0, 3.0}),
                  InputError);
}

TEST_CASE("rate_fit recovers a noisy slope within three stderr") {
  SplitMix64 rng(77);
  std::vector<double> xs, ys;
  for (int i = 0; i < 40; ++i) {
    double x = 0.1 * i;
    xs.push_back(x);
    ys.push_back(-0.5 * x + 1.0 + 0.05 * (rng.next_double() - 0.5));
  }
  LineFit f = rate_fit(xs, ys);
  CHECK(std::abs(f.slope + 0.5) <= 3.0 * f.slope_stderr);

  // Independent normal-equation route.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(xs.size());
  for (int i = 0; i < n; ++i) {
    sx += xs[static_cast<std::size_t>(i)];
    sy += ys[static_cast<std::size_t>(i)];
    sxx += xs[static_cast<std::size_t>(i)] * xs[static_cast<std::size_t>(i)];
    sxy += xs[static_cast<std::size_t>(i)] * ys[static_cast<std::size_t>(i)];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(f.slope == doctest::Approx(slope).epsilon(1e-10));
}

TEST_CASE("sample complexity experiment determinism and lower bound") {
  MetricSpec spec(2.0, {1, 1});
  ProductMeasure rho = jittered_grid(spec, 4, 0.7, 1.3, 81);
  InstanceParams params;
  params.max_marginal_atoms = 4;
  MarginalVector mu = random_marginal_vector(params, 82);

  std::vector<std::size_t> ngrid{20, 40};
  std::vector<std::size_t> mgrid{20, 40};
  RateTable t1 = sample_complexity_experiment(rho, mu, ngrid, mgrid, 3, 999, 2.0);
  RateTable t2 = sample_complexity_experiment(rho, mu, ngrid, mgrid, 3, 999, 2.0);
  REQUIRE(t1.rows.size() == t2.rows.size());
  for (std::size_t i = 0; i < t1.rows.size(); ++i) {
    CHECK(t1.rows[i].distance == t2.rows[i].distance);
    CHECK(t1.rows[i].seed == t2.rows[i].seed);
  }
  // Rows sorted on (n, m, trial), per-trial lower bound holds.
  for (std::size_t i = 1; i < t1.rows.size(); ++i) {
    const RateRow &a = t1.rows[i - 1], &b = t1.rows[i];
    bool ordered = a.n < b.n || (a.n == b.n && (a.m < b.m || (a.m == b.m && a.trial < b.trial)));
    CHECK(ordered);
  }
  for (const RateRow& r : t1.rows) {
    CHECK(r.marginal_lower <= r.distance + 1e-9);
  }
  CHECK(t1.ref_slope_n == doctest::Approx(-0.5));
  REQUIRE(t1.ref_slopes_m.size() == 2);
  CHECK(t1.ref_slopes_m[0] == doctest::Approx(-(1.0 / 6.0) / 1.5));
}
