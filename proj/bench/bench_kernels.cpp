// Timing comparison of the OpenMP kernels against their serial references.
// Usage: wproj_bench [size_multiplier]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "wproj/complexity.hpp"
#include "wproj/instances.hpp"
#include "wproj/kernels.hpp"
#include "wproj/ot.hpp"
#include "wproj/parallel.hpp"
#include "wproj/rng.hpp"
#include "wproj/shadow.hpp"

using namespace wproj;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& f, int reps) {
  // One warmup, then best-of-reps.
  f();
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    f();
    auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

// Exactly n distinct random atoms, uniform weights.
DiscreteMeasure cloud(int dim, int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> coords(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim));
  for (double& c : coords) c = rng.next_double(-1.0, 1.0);
  return DiscreteMeasure::from_flat(
      dim, std::move(coords),
      std::vector<double>(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n)));
}

void report(const char* name, double serial_ms, double omp_ms, bool identical) {
  std::printf("%-36s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx   %s\n", name,
              serial_ms, omp_ms, serial_ms / omp_ms,
              identical ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  const int mult = argc > 1 ? std::atoi(argv[1]) : 1;
  std::printf("threads available: %d\n", hardware_threads());

  // Pairwise cost matrix on two medium point clouds.
  {
    const int n = 600 * mult;
    DiscreteMeasure a = cloud(3, n, 17);
    DiscreteMeasure b = cloud(3, n, 18);
    MetricSpec spec(2.0, {3});
    std::vector<double> out_serial(a.size() * b.size());
    std::vector<double> out_omp(a.size() * b.size());
    double ts = time_ms([&] { pairwise_cost_serial(a, b, spec, out_serial); }, 5);
    double tp = time_ms([&] { pairwise_cost_omp(a, b, spec, out_omp); }, 5);
    report("pairwise_cost (600x600, d=3)", ts, tp, out_serial == out_omp);
  }

  // Fractional exponent hits the pow() path.
  {
    const int n = 400 * mult;
    DiscreteMeasure a = cloud(2, n, 19);
    DiscreteMeasure b = cloud(2, n, 20);
    MetricSpec spec(1.5, {2});
    std::vector<double> out_serial(a.size() * b.size());
    std::vector<double> out_omp(a.size() * b.size());
    double ts = time_ms([&] { pairwise_cost_serial(a, b, spec, out_serial); }, 5);
    double tp = time_ms([&] { pairwise_cost_omp(a, b, spec, out_omp); }, 5);
    report("pairwise_cost (400x400, p=1.5)", ts, tp, out_serial == out_omp);
  }

  // Greedy-net distance updates.
  {
    const int n = 200000 * mult;
    DiscreteMeasure pts = cloud(2, n, 21);
    MetricSpec spec(2.0, {2});
    std::vector<double> d_serial(pts.size(), kInf), d_omp(pts.size(), kInf);
    DiscreteMeasure centers = cloud(2, 64, 22);
    double ts = time_ms(
        [&] {
          std::fill(d_serial.begin(), d_serial.end(), kInf);
          for (std::size_t c = 0; c < centers.size(); ++c) {
            min_dist_update_serial(pts, centers.atom(c), spec, d_serial);
          }
        },
        3);
    double tp = time_ms(
        [&] {
          std::fill(d_omp.begin(), d_omp.end(), kInf);
          for (std::size_t c = 0; c < centers.size(); ++c) {
            min_dist_update_omp(pts, centers.atom(c), spec, d_omp);
          }
        },
        3);
    report("min_dist_update (200k pts, 64 ctrs)", ts, tp, d_serial == d_omp);
  }

  // Batch of independent shadow compositions (the experiment inner loop).
  {
    InstanceParams params;
    const std::size_t batch = 200 * static_cast<std::size_t>(mult);
    MetricSpec spec(2.0, {1, 1});
    std::vector<double> values_serial(batch), values_omp(batch);
    auto run = [&](Parallelism par, std::vector<double>& out) {
      parallel_for(
          batch,
          [&](std::size_t i) {
            ProductMeasure rho = random_product_measure(params, 2.0, mix_seed(7, i, 0));
            MarginalVector mu = random_marginal_vector(params, mix_seed(7, i, 1));
            out[i] = compose_shadow(rho, mu, spec).value;
          },
          par);
    };
    double ts = time_ms([&] { run(Parallelism::kSerial, values_serial); }, 3);
    double tp = time_ms([&] { run(Parallelism::kOpenMP, values_omp); }, 3);
    report("shadow batch (200 instances)", ts, tp, values_serial == values_omp);
  }

  return 0;
}
