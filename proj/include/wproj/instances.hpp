#pragma once

#include <cstdint>

#include "wproj/measures.hpp"

namespace wproj {

/// Seeded generators for the randomized experiment batches. All draws go
/// through SplitMix64, so an instance is reproducible from (params, seed).
struct InstanceParams {
  std::vector<int> block_dims{1, 1};
  int max_marginal_atoms = 4;
  int max_rho_atoms = 4;
  double lo = 0.0;
  double hi = 1.0;
};

/// Random measure on [lo, hi]^dim with 1..max_atoms atoms and positive
/// normalized weights.
DiscreteMeasure random_measure(int dim, int max_atoms, double lo, double hi,
                               std::uint64_t seed);

ProductMeasure random_product_measure(const InstanceParams& params, double p,
                                      std::uint64_t seed);

MarginalVector random_marginal_vector(const InstanceParams& params,
                                      std::uint64_t seed);

/// Grid product measure on [0,1]^K with strictly positive weights jittered in
/// [w_min, w_max] before normalization, the discrete stand-in for a density
/// bounded above and below.
ProductMeasure jittered_grid(const MetricSpec& spec, int points_per_axis,
                             double w_min, double w_max, std::uint64_t seed);

}  // namespace wproj
