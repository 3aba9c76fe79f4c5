#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wproj/errors.hpp"

namespace wproj {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Neumaier-compensated accumulator; duplicate merges and plan costs use it
/// so totals do not drift with summation order.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Ground exponent p (1 <= p, or infinity) together with the block structure
/// (d_1, ..., d_K) of the product space.
struct MetricSpec {
  double p = 2.0;
  std::vector<int> block_dims;

  MetricSpec() = default;
  MetricSpec(double exponent, std::vector<int> dims)
      : p(exponent), block_dims(std::move(dims)) {
    validate();
  }

  void validate() const;
  bool is_inf() const { return std::isinf(p); }
  int blocks() const { return static_cast<int>(block_dims.size()); }
  int total_dim() const;
  int block_offset(int i) const;

  std::span<const double> block(std::span<const double> x, int i) const {
    return x.subspan(static_cast<std::size_t>(block_offset(i)),
                     static_cast<std::size_t>(block_dims[static_cast<std::size_t>(i)]));
  }

  /// Spec of the single block i (exponent preserved).
  MetricSpec block_spec(int i) const {
    return MetricSpec(p, {block_dims.at(static_cast<std::size_t>(i))});
  }
};

using Point = std::vector<double>;

/// Separable product metric: (sum_i ||x_i - y_i||_p^p)^(1/p) for finite p,
/// max_i ||x_i - y_i||_inf for p = infinity. Since the per-block metric is
/// itself l_p, both cases collapse to the flat l_p distance on all
/// coordinates; the block structure only matters for marginals and kernels.
double ground_distance(std::span<const double> x, std::span<const double> y,
                       const MetricSpec& spec);

/// d^p for finite p (the transport cost integrand), d itself for p = infinity.
double ground_cost(std::span<const double> x, std::span<const double> y,
                   const MetricSpec& spec);

/// Finitely supported probability measure on R^dim. Atoms are deduplicated on
/// construction by exact coordinate equality (after normalizing -0.0 to +0.0);
/// weights must be strictly positive and sum to 1 within 1e-12 (renormalized).
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(const std::vector<Point>& atoms, std::vector<double> weights);
  /// Uniform weights over `atoms`.
  explicit DiscreteMeasure(const std::vector<Point>& atoms);
  static DiscreteMeasure from_flat(int dim, std::vector<double> coords,
                                   std::vector<double> weights);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> atom(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& coords() const { return coords_; }

  /// Component-wise [min, max] over atoms; the compactness record kept in
  /// run metadata.
  std::pair<Point, Point> bounding_box() const;

  /// Exact equality as measures: same deduplicated atoms (bitwise canonical
  /// coords) with weights equal within `tol`.
  bool approx_equal(const DiscreteMeasure& other, double tol = 1e-12) const;

  /// Index of the atom with exactly these coordinates, or -1.
  std::ptrdiff_t find_atom(std::span<const double> coords) const;

 private:
  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

/// Discrete measure on a K-block product space.
struct ProductMeasure {
  DiscreteMeasure base;
  MetricSpec spec;

  ProductMeasure() = default;
  ProductMeasure(DiscreteMeasure m, MetricSpec s);
};

/// Vector of K per-block measures.
struct MarginalVector {
  std::vector<DiscreteMeasure> components;

  int blocks() const { return static_cast<int>(components.size()); }
};

/// Pushforward of m under the projection onto block i (0-based); duplicate
/// projected atoms merge with compensated weight sums.
DiscreteMeasure marginal(const ProductMeasure& m, int i);

/// marginal() plus, for every atom of m, the index of its projection in the
/// returned measure. compose_shadow keys kernels by these indices.
std::pair<DiscreteMeasure, std::vector<std::size_t>> marginal_with_index(
    const ProductMeasure& m, int i);

MarginalVector marginals_of(const ProductMeasure& m);

/// Empirical measure of n i.i.d. draws: inverse-CDF over the atom list in
/// construction order, driven by SplitMix64(seed); repeated draws merge into
/// weight multiples of 1/n.
DiscreteMeasure sample_empirical(const DiscreteMeasure& m, std::size_t n,
                                 std::uint64_t seed);
ProductMeasure sample_empirical(const ProductMeasure& m, std::size_t n,
                                std::uint64_t seed);

/// Atoms shifted by `offset` (same weights).
DiscreteMeasure translate(const DiscreteMeasure& m, std::span<const double> offset);

/// n equally spaced atoms on [lo, hi] with the given (or uniform) weights.
DiscreteMeasure grid_measure_1d(double lo, double hi, int n,
                                std::vector<double> weights = {});

/// Product grid over per-block 1-D grids, weights = product of per-axis
/// weights (or uniform). spec must have K 1-D blocks.
ProductMeasure product_grid(const MetricSpec& spec,
                            const std::vector<std::vector<double>>& axes,
                            const std::vector<std::vector<double>>& axis_weights = {});

}  // namespace wproj
