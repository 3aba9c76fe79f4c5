#include "wproj/kernels.hpp"

#include "wproj/errors.hpp"

namespace wproj {

void pairwise_cost_serial(const DiscreteMeasure& source,
                          const DiscreteMeasure& target,
                          const MetricSpec& spec, std::span<double> out) {
  const std::size_t rows = source.size(), cols = target.size();
  if (out.size() != rows * cols) throw InputError("pairwise_cost: bad output size");
  for (std::size_t r = 0; r < rows; ++r) {
    auto x = source.atom(r);
    for (std::size_t c = 0; c < cols; ++c) {
      out[r * cols + c] = ground_cost(x, target.atom(c), spec);
    }
  }
}

void pairwise_cost_omp(const DiscreteMeasure& source,
                       const DiscreteMeasure& target, const MetricSpec& spec,
                       std::span<double> out) {
  const std::size_t rows = source.size(), cols = target.size();
  if (out.size() != rows * cols) throw InputError("pairwise_cost: bad output size");
  parallel_for(rows, [&](std::size_t r) {
    auto x = source.atom(r);
    for (std::size_t c = 0; c < cols; ++c) {
      out[r * cols + c] = ground_cost(x, target.atom(c), spec);
    }
  });
}

std::vector<double> pairwise_cost(const DiscreteMeasure& source,
                                  const DiscreteMeasure& target,
                                  const MetricSpec& spec, Parallelism par) {
  std::vector<double> out(source.size() * target.size());
  if (par == Parallelism::kOpenMP) {
    pairwise_cost_omp(source, target, spec, out);
  } else {
    pairwise_cost_serial(source, target, spec, out);
  }
  return out;
}

void min_dist_update_serial(const DiscreteMeasure& points,
                            std::span<const double> center,
                            const MetricSpec& spec, std::span<double> dist) {
  if (dist.size() != points.size()) throw InputError("min_dist_update: bad size");
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d = ground_distance(points.atom(i), center, spec);
    if (d < dist[i]) dist[i] = d;
  }
}

void min_dist_update_omp(const DiscreteMeasure& points,
                         std::span<const double> center,
                         const MetricSpec& spec, std::span<double> dist) {
  if (dist.size() != points.size()) throw InputError("min_dist_update: bad size");
  parallel_for(points.size(), [&](std::size_t i) {
    double d = ground_distance(points.atom(i), center, spec);
    if (d < dist[i]) dist[i] = d;
  });
}

void min_dist_update(const DiscreteMeasure& points,
                     std::span<const double> center, const MetricSpec& spec,
                     std::span<double> dist, Parallelism par) {
  if (par == Parallelism::kOpenMP) {
    min_dist_update_omp(points, center, spec, dist);
  } else {
    min_dist_update_serial(points, center, spec, dist);
  }
}

std::size_t argmax_serial(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t argmax_omp(std::span<const double> values) {
  const int nt = hardware_threads();
  if (values.size() < 2 || nt < 2) return argmax_serial(values);
  const std::size_t chunks = static_cast<std::size_t>(nt);
  const std::size_t step = (values.size() + chunks - 1) / chunks;
  std::vector<std::size_t> local(chunks, 0);
  parallel_for(chunks, [&](std::size_t k) {
    std::size_t lo = k * step;
    std::size_t hi = std::min(values.size(), lo + step);
    std::size_t best = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      if (values[i] > values[best]) best = i;
    }
    local[k] = lo < values.size() ? best : 0;
  });
  // Serial reduction in chunk order keeps the first-occurrence tie rule.
  std::size_t best = 0;
  for (std::size_t k = 0; k < chunks; ++k) {
    std::size_t lo = k * step;
    if (lo >= values.size()) break;
    if (values[local[k]] > values[best]) best = local[k];
  }
  return best;
}

std::size_t argmax(std::span<const double> values, Parallelism par) {
  if (values.empty()) throw InputError("argmax: empty input");
  return par == Parallelism::kOpenMP ? argmax_omp(values) : argmax_serial(values);
}

}  // namespace wproj
