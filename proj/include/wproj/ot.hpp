#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wproj/measures.hpp"
#include "wproj/parallel.hpp"

namespace wproj {

/// Dense matrix of transport costs: ground_distance^p for finite p, plain
/// ground_distance for p = infinity.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double p = 2.0;
  std::vector<double> entries;

  double at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
};

CostMatrix build_cost_matrix(const DiscreteMeasure& source,
                             const DiscreteMeasure& target,
                             const MetricSpec& spec,
                             Parallelism par = Parallelism::kOpenMP);

/// Nonnegative coupling table between two discrete measures. Row sums match
/// the source weights and column sums the target weights within 1e-9.
class TransportPlan {
 public:
  TransportPlan(DiscreteMeasure source, DiscreteMeasure target,
                std::vector<double> table);

  const DiscreteMeasure& source() const { return source_; }
  const DiscreteMeasure& target() const { return target_; }
  double at(std::size_t i, std::size_t j) const {
    return table_[i * target_.size() + j];
  }
  const std::vector<double>& table() const { return table_; }
  std::size_t rows() const { return source_.size(); }
  std::size_t cols() const { return target_.size(); }

  TransportPlan transposed() const;

  struct Entry {
    std::size_t row, col;
    double mass;
  };
  std::vector<Entry> nonzeros() const;

 private:
  DiscreteMeasure source_, target_;
  std::vector<double> table_;
};

struct OTResult {
  TransportPlan plan;
  double value = 0.0;  // the W_p distance (bottleneck value for p = inf)
  double cost = 0.0;   // integral of d^p (equals value for p = inf)
  int iterations = 0;
  // Optimal duals (row potentials u, column potentials v); empty for the
  // bottleneck solver. At optimality sum u_i a_i + sum v_j b_j = cost within
  // 1e-9.
  std::vector<double> duals_u;
  std::vector<double> duals_v;
};

/// Exact W_p for finite p via the transportation simplex. Deterministic:
/// northwest-corner start, Bland entering rule on (row, col) order, symbolic
/// epsilon-perturbed supplies so every pivot is nondegenerate. The returned
/// plan is a vertex of the transportation polytope (<= n+m-1 nonzeros) and
/// optimality is certified through the recovered duals (reduced costs
/// >= -1e-9). For p = 1 the cost is not strictly convex and optimal plans
/// are highly non-unique; the pivot order above is what makes the returned
/// plan canonical.
OTResult solve_ot(const DiscreteMeasure& source, const DiscreteMeasure& target,
                  const MetricSpec& spec);

/// Exact W_inf (bottleneck): binary search over the sorted distinct pairwise
/// distances, feasibility checked by bipartite max-flow on edges of cost <= t.
OTResult solve_ot_inf(const DiscreteMeasure& source,
                      const DiscreteMeasure& target, const MetricSpec& spec);

/// Dispatches on spec.p.
OTResult solve_wasserstein(const DiscreteMeasure& source,
                           const DiscreteMeasure& target,
                           const MetricSpec& spec);

/// (sum table * d^p)^(1/p) for finite p; max distance on the support for inf.
double plan_cost(const TransportPlan& plan, const MetricSpec& spec);

/// Conditional means of the plan's source given each target atom; equals the
/// Monge map when every column has a single nonzero.
struct BarycentricMap {
  std::vector<std::size_t> targets;  // target atom indices with positive mass
  std::vector<Point> means;
  std::vector<std::size_t> skipped;  // zero-mass columns (flagged, excluded)
  bool deterministic = false;        // every kept column had one nonzero
};
BarycentricMap barycentric_map(const TransportPlan& plan);

/// Aggregated distance between marginal vectors:
/// (sum_i W_p^p(a_i, b_i))^(1/p) for finite p, max_i W_inf for p = inf.
double marginal_vector_distance(const MarginalVector& a,
                                const MarginalVector& b,
                                const MetricSpec& spec);

/// Per-component distances W_q(a_i, b_i) with exponent q (ground metric l_q
/// on each block).
std::vector<double> marginal_component_distances(const MarginalVector& a,
                                                 const MarginalVector& b,
                                                 const MetricSpec& spec,
                                                 double q);

}  // namespace wproj
