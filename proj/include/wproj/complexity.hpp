#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wproj/fit.hpp"
#include "wproj/measures.hpp"
#include "wproj/parallel.hpp"

namespace wproj {

/// Greedy covering estimate at one scale. n_balls counts closed balls of
/// diameter epsilon; the farthest-point construction over-covers by at most a
/// factor-2 shift in scale: N_opt(eps) <= n_balls <= N_opt(eps/2).
struct CoveringEstimate {
  double epsilon = 0.0;
  std::size_t n_balls = 0;
  double d_eps = 0.0;  // log N / (-log eps)
  double tau = 0.0;    // discarded mass (0 for the plain covering)
  std::vector<std::size_t> centers;  // atom indices of the chosen centers
};

/// Farthest-point net over the atom set of `points` (weights ignored):
/// centers are added until every atom lies within epsilon/2 of one.
CoveringEstimate covering_number(const DiscreteMeasure& points, double epsilon,
                                 const MetricSpec& norm,
                                 Parallelism par = Parallelism::kOpenMP);

/// Greedy upper bound for the (eps, tau)-covering number: run the net, then
/// drop the centers covering the least mass while at least 1 - tau is kept.
CoveringEstimate covering_with_mass_drop(const DiscreteMeasure& m, double epsilon,
                                         double tau, const MetricSpec& norm,
                                         Parallelism par = Parallelism::kOpenMP);

/// Covering profile d(eps) over an epsilon grid plus its log-log slope.
struct CoveringProfile {
  std::vector<CoveringEstimate> estimates;
  LineFit dimension_fit;  // log N against -log eps
};

CoveringProfile covering_profile(const DiscreteMeasure& points,
                                 std::span<const double> epsilons, double tau,
                                 const MetricSpec& norm);

struct RateRow {
  std::size_t n = 0;
  std::size_t m = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double distance = 0.0;        // W_p between the two canonical shadows
  double marginal_lower = 0.0;  // W_p(mu, mu_hat_m), the per-trial lower bound
};

struct RateTable {
  std::vector<RateRow> rows;
  LineFit fit_vs_n;  // log mean distance vs log n, m fixed at max
  LineFit fit_vs_m;  // log mean distance vs log m, n fixed at max
  double ref_slope_n = 0.0;             // -1 / sum d_i
  std::vector<double> ref_slopes_m;     // -theta(p) / s_i
};

struct RateConfig {
  std::vector<double> s;  // defaults d_i + 0.5
  std::vector<double> t;  // defaults d_i
  double theta_delta = 0.01;
  std::size_t support_cap = 1'000'000;
  Parallelism par = Parallelism::kOpenMP;
};

/// For every (n, m, trial): empirical rho_hat_n and mu_hat_m with split
/// seeds, both canonical shadows, and their W_p distance. Trials run in
/// parallel; the table is sorted on (n, m, trial) so output is
/// schedule-independent.
RateTable sample_complexity_experiment(const ProductMeasure& rho,
                                       const MarginalVector& mu,
                                       std::span<const std::size_t> n_grid,
                                       std::span<const std::size_t> m_grid,
                                       int trials, std::uint64_t base_seed,
                                       double p, const RateConfig& cfg = {});

/// Ordinary least squares on (xs, ys); slope, stderr and r^2.
LineFit rate_fit(std::span<const double> xs, std::span<const double> ys);

}  // namespace wproj
