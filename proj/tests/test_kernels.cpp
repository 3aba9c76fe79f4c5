#include <doctest.h>

#include "wproj/instances.hpp"
#include "wproj/kernels.hpp"
#include "wproj/rng.hpp"

using namespace wproj;

TEST_CASE("parallel kernels match the serial reference bitwise") {
  MetricSpec spec(2.0, {2});
  DiscreteMeasure a = random_measure(2, 40, -1.0, 1.0, 11);
  DiscreteMeasure b = random_measure(2, 37, -1.0, 1.0, 12);

  std::vector<double> serial(a.size() * b.size()), omp(a.size() * b.size());
  pairwise_cost_serial(a, b, spec, serial);
  pairwise_cost_omp(a, b, spec, omp);
  CHECK(serial == omp);

  std::vector<double> d1(a.size(), kInf), d2(a.size(), kInf);
  for (std::size_t c = 0; c < b.size(); ++c) {
    min_dist_update_serial(a, b.atom(c), spec, d1);
    min_dist_update_omp(a, b.atom(c), spec, d2);
  }
  CHECK(d1 == d2);

  CHECK(argmax_serial(d1) == argmax_omp(d1));
  // First-occurrence tie rule under both variants.
  std::vector<double> ties{1.0, 3.0, 3.0, 2.0, 3.0};
  CHECK(argmax_serial(ties) == 1);
  CHECK(argmax_omp(ties) == 1);
}

TEST_CASE("pairwise cost equals ground_cost entrywise") {
  MetricSpec spec(1.5, {1, 1});
  DiscreteMeasure a = random_measure(2, 6, 0.0, 1.0, 21);
  DiscreteMeasure b = random_measure(2, 5, 0.0, 1.0, 22);
  auto costs = pairwise_cost(a, b, spec, Parallelism::kSerial);
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < b.size(); ++c) {
      CHECK(costs[r * b.size() + c] == ground_cost(a.atom(r), b.atom(c), spec));
    }
  }
}
