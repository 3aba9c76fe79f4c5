#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wproj/measures.hpp"
#include "wproj/parallel.hpp"

namespace wproj {

/// Data-parallel inner loops, each with a serial reference implementation.
/// The OpenMP variants fill independent output slots, so for any thread count
/// they produce bitwise the same arrays as the serial versions; tests compare
/// them and bench/ measures the speedup.

/// out[r * cols + c] = ground_cost(source atom r, target atom c).
void pairwise_cost_serial(const DiscreteMeasure& source,
                          const DiscreteMeasure& target,
                          const MetricSpec& spec, std::span<double> out);
void pairwise_cost_omp(const DiscreteMeasure& source,
                       const DiscreteMeasure& target, const MetricSpec& spec,
                       std::span<double> out);
std::vector<double> pairwise_cost(const DiscreteMeasure& source,
                                  const DiscreteMeasure& target,
                                  const MetricSpec& spec,
                                  Parallelism par = Parallelism::kOpenMP);

/// dist[i] = min(dist[i], distance(points atom i, center)); the inner update
/// of the greedy farthest-point net.
void min_dist_update_serial(const DiscreteMeasure& points,
                            std::span<const double> center,
                            const MetricSpec& spec, std::span<double> dist);
void min_dist_update_omp(const DiscreteMeasure& points,
                         std::span<const double> center,
                         const MetricSpec& spec, std::span<double> dist);
void min_dist_update(const DiscreteMeasure& points,
                     std::span<const double> center, const MetricSpec& spec,
                     std::span<double> dist,
                     Parallelism par = Parallelism::kOpenMP);

/// Index of the largest value, first occurrence on ties (order-independent
/// of thread count: the parallel variant reduces per-chunk argmaxes serially).
std::size_t argmax_serial(std::span<const double> values);
std::size_t argmax_omp(std::span<const double> values);
std::size_t argmax(std::span<const double> values,
                   Parallelism par = Parallelism::kOpenMP);

}  // namespace wproj
