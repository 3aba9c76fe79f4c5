#pragma once

#include <cstddef>
#include <vector>

#include "wproj/measures.hpp"
#include "wproj/ot.hpp"

namespace wproj {

/// Row-stochastic disintegration of a plan against its target: row j is the
/// conditional distribution of the source given target atom j.
struct ConditionalKernel {
  DiscreteMeasure conditioning;  // the plan's target
  DiscreteMeasure source;        // the plan's source
  // rows[j] = sparse probability vector over source atoms, sums to 1.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
};

ConditionalKernel disintegrate(const TransportPlan& plan);

struct GluedEntry {
  std::size_t x;  // shadow atom index
  std::size_t y;  // conditioning (rho) atom index
  double mass;
};

/// The projection of rho onto the couplings with marginals mu: the shadow
/// measure itself, the glued coupling on X x X witnessing the value, the
/// certified value and its per-block components.
struct ShadowResult {
  ProductMeasure shadow;
  std::vector<GluedEntry> glued;
  double value = 0.0;
  std::vector<double> per_marginal_values;
  std::vector<ConditionalKernel> kernels;  // one per block, conditioned on rho_i
};

/// Composes the canonical shadow: per-block optimal couplings (transportation
/// simplex for finite p, bottleneck solver for p = inf, both with the
/// deterministic pivot order), disintegrated against rho_i and multiplied
/// across blocks over the atoms of rho. Only nonzero kernel products are
/// enumerated; exceeding `support_cap` projected atoms raises SizeError.
ShadowResult compose_shadow(const ProductMeasure& rho, const MarginalVector& mu,
                            const MetricSpec& spec,
                            std::size_t support_cap = 1'000'000);

/// True iff every per-block kernel row is a Dirac; then the shadow equals the
/// pushforward of rho under the per-block maps, returned as atom-index tables
/// (maps[i][rho_i atom j] = mu_i atom index).
struct MapInducedResult {
  bool is_map = false;
  std::vector<std::vector<std::size_t>> maps;
};

MapInducedResult is_map_induced(const ShadowResult& result);

}  // namespace wproj
