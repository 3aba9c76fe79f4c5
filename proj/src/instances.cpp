#include "wproj/instances.hpp"

#include <cmath>

#include "wproj/rng.hpp"

namespace wproj {

DiscreteMeasure random_measure(int dim, int max_atoms, double lo, double hi,
                               std::uint64_t seed) {
  SplitMix64 rng(seed);
  int count = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_atoms)));
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(static_cast<std::size_t>(count * dim));
  weights.reserve(static_cast<std::size_t>(count));
  double total = 0.0;
  for (int a = 0; a < count; ++a) {
    for (int c = 0; c < dim; ++c) coords.push_back(rng.next_double(lo, hi));
    double w = 0.05 + rng.next_double();  // bounded away from zero
    weights.push_back(w);
    total += w;
  }
  for (double& w : weights) w /= total;
  // Nudge the normalized weights onto an exact unit sum.
  double sum = 0.0;
  for (double w : weights) sum += w;
  weights.back() += 1.0 - sum;
  return DiscreteMeasure::from_flat(dim, std::move(coords), std::move(weights));
}

ProductMeasure random_product_measure(const InstanceParams& params, double p,
                                      std::uint64_t seed) {
  MetricSpec spec(p, params.block_dims);
  DiscreteMeasure base = random_measure(spec.total_dim(), params.max_rho_atoms,
                                        params.lo, params.hi, seed);
  return ProductMeasure(std::move(base), std::move(spec));
}

MarginalVector random_marginal_vector(const InstanceParams& params,
                                      std::uint64_t seed) {
  MarginalVector v;
  v.components.reserve(params.block_dims.size());
  for (std::size_t i = 0; i < params.block_dims.size(); ++i) {
    v.components.push_back(random_measure(params.block_dims[i],
                                          params.max_marginal_atoms, params.lo,
                                          params.hi, mix_seed(seed, i)));
  }
  return v;
}

ProductMeasure jittered_grid(const MetricSpec& spec, int points_per_axis,
                             double w_min, double w_max, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> axes;
  std::vector<std::vector<double>> axis_weights;
  for (int i = 0; i < spec.blocks(); ++i) {
    std::vector<double> ax(static_cast<std::size_t>(points_per_axis));
    std::vector<double> w(static_cast<std::size_t>(points_per_axis));
    double total = 0.0;
    for (int k = 0; k < points_per_axis; ++k) {
      ax[static_cast<std::size_t>(k)] =
          points_per_axis == 1
              ? 0.0
              : static_cast<double>(k) / static_cast<double>(points_per_axis - 1);
      w[static_cast<std::size_t>(k)] = rng.next_double(w_min, w_max);
      total += w[static_cast<std::size_t>(k)];
    }
    for (double& x : w) x /= total;
    double sum = 0.0;
    for (double x : w) sum += x;
    w.back() += 1.0 - sum;
    axes.push_back(std::move(ax));
    axis_weights.push_back(std::move(w));
  }
  return product_grid(spec, axes, axis_weights);
}

}  // namespace wproj
