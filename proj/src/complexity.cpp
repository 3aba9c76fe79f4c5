#include "wproj/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "wproj/errors.hpp"
#include "wproj/kernels.hpp"
#include "wproj/ot.hpp"
#include "wproj/rng.hpp"
#include "wproj/shadow.hpp"
#include "wproj/stability.hpp"

namespace wproj {

CoveringEstimate covering_number(const DiscreteMeasure& points, double epsilon,
                                 const MetricSpec& norm, Parallelism par) {
  if (!(epsilon > 0.0)) throw InputError("covering_number: epsilon must be positive");
  if (points.size() == 0) throw InputError("covering_number: empty point set");
  const double radius = epsilon / 2.0;  // balls of diameter epsilon

  std::vector<double> dist(points.size(), kInf);
  CoveringEstimate est;
  est.epsilon = epsilon;
  // First center: atom 0 (deterministic start).
  std::size_t next = 0;
  while (true) {
    est.centers.push_back(next);
    min_dist_update(points, points.atom(next), norm, dist, par);
    std::size_t far = argmax(dist, par);
    if (dist[far] <= radius) break;
    next = far;
  }
  est.n_balls = est.centers.size();
  est.tau = 0.0;
  est.d_eps = est.n_balls == 1 ? 0.0
                               : std::log(static_cast<double>(est.n_balls)) /
                                     (-std::log(epsilon));
  return est;
}

CoveringEstimate covering_with_mass_drop(const DiscreteMeasure& m, double epsilon,
                                         double tau, const MetricSpec& norm,
                                         Parallelism par) {
  if (tau < 0.0 || tau >= 1.0) throw InputError("covering_with_mass_drop: tau in [0,1) required");
  CoveringEstimate est = covering_number(m, epsilon, norm, par);
  est.tau = tau;
  if (tau == 0.0) return est;

  // Assign each atom to its nearest center, then delete the lightest centers
  // while the retained mass stays >= 1 - tau.
  std::vector<double> center_mass(est.centers.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t c = 0; c < est.centers.size(); ++c) {
      double d = ground_distance(m.atom(i), m.atom(est.centers[c]), norm);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    center_mass[arg] += m.weight(i);
  }
  std::vector<std::size_t> order(est.centers.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (center_mass[a] != center_mass[b]) return center_mass[a] < center_mass[b];
    return a < b;
  });
  double dropped = 0.0;
  std::vector<char> removed(est.centers.size(), 0);
  for (std::size_t c : order) {
    if (est.centers.size() - static_cast<std::size_t>(std::count(removed.begin(), removed.end(), 1)) <= 1) break;
    if (dropped + center_mass[c] <= tau + 1e-15) {
      removed[c] = 1;
      dropped += center_mass[c];
    }
  }
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < est.centers.size(); ++c) {
    if (!removed[c]) kept.push_back(est.centers[c]);
  }
  est.centers = std::move(kept);
  est.n_balls = est.centers.size();
  est.d_eps = est.n_balls == 1 ? 0.0
                               : std::log(static_cast<double>(est.n_balls)) /
                                     (-std::log(epsilon));
  return est;
}

CoveringProfile covering_profile(const DiscreteMeasure& points,
                                 std::span<const double> epsilons, double tau,
                                 const MetricSpec& norm) {
  if (epsilons.empty()) throw InputError("covering_profile: empty epsilon grid");
  CoveringProfile prof;
  std::vector<double> xs, ys;
  for (double eps : epsilons) {
    CoveringEstimate e = tau > 0.0 ? covering_with_mass_drop(points, eps, tau, norm)
                                   : covering_number(points, eps, norm);
    xs.push_back(-std::log(eps));
    ys.push_back(std::log(static_cast<double>(e.n_balls)));
    prof.estimates.push_back(std::move(e));
  }
  if (xs.size() >= 3) {
    prof.dimension_fit = fit_line(xs, ys);
  } else {
    prof.dimension_fit = LineFit{};
  }
  return prof;
}

RateTable sample_complexity_experiment(const ProductMeasure& rho,
                                       const MarginalVector& mu,
                                       std::span<const std::size_t> n_grid,
                                       std::span<const std::size_t> m_grid,
                                       int trials, std::uint64_t base_seed,
                                       double p, const RateConfig& cfg) {
  if (n_grid.empty() || m_grid.empty()) {
    throw InputError("sample_complexity_experiment: empty size grid");
  }
  if (trials < 1) throw InputError("sample_complexity_experiment: trials must be >= 1");
  MetricSpec spec(p, rho.spec.block_dims);
  const int K = spec.blocks();

  ShadowResult reference = compose_shadow(rho, mu, spec, cfg.support_cap);

  struct Task {
    std::size_t n, m;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t n : n_grid) {
    for (std::size_t m : m_grid) {
      for (int t = 0; t < trials; ++t) tasks.push_back({n, m, t});
    }
  }
  std::vector<RateRow> rows(tasks.size());
  parallel_for(
      tasks.size(),
      [&](std::size_t idx) {
        const Task& task = tasks[idx];
        std::uint64_t seed =
            mix_seed(base_seed, task.n, task.m, static_cast<std::uint64_t>(task.trial));
        ProductMeasure rho_hat = sample_empirical(rho, task.n, mix_seed(seed, 0));
        MarginalVector mu_hat;
        mu_hat.components.reserve(static_cast<std::size_t>(K));
        for (int i = 0; i < K; ++i) {
          mu_hat.components.push_back(
              sample_empirical(mu.components[static_cast<std::size_t>(i)], task.m,
                               mix_seed(seed, static_cast<std::uint64_t>(i) + 1)));
        }
        ShadowResult hat = compose_shadow(rho_hat, mu_hat, spec, cfg.support_cap);
        RateRow row;
        row.n = task.n;
        row.m = task.m;
        row.trial = task.trial;
        row.seed = seed;
        row.distance =
            solve_wasserstein(reference.shadow.base, hat.shadow.base, spec).value;
        row.marginal_lower = marginal_vector_distance(mu, mu_hat, spec);
        rows[idx] = row;
      },
      cfg.par);
  std::sort(rows.begin(), rows.end(), [](const RateRow& a, const RateRow& b) {
    if (a.n != b.n) return a.n < b.n;
    if (a.m != b.m) return a.m < b.m;
    return a.trial < b.trial;
  });

  RateTable table;
  table.rows = std::move(rows);

  // Mean distances per n at m = max, and per m at n = max.
  const std::size_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
  const std::size_t m_max = *std::max_element(m_grid.begin(), m_grid.end());
  std::map<std::size_t, std::pair<double, int>> by_n, by_m;
  for (const RateRow& r : table.rows) {
    if (r.m == m_max) {
      by_n[r.n].first += r.distance;
      by_n[r.n].second += 1;
    }
    if (r.n == n_max) {
      by_m[r.m].first += r.distance;
      by_m[r.m].second += 1;
    }
  }
  auto fit_of = [](const std::map<std::size_t, std::pair<double, int>>& groups) {
    std::vector<double> xs, ys;
    for (const auto& [size, acc] : groups) {
      double mean = acc.first / acc.second;
      if (mean > 0.0) {
        xs.push_back(std::log(static_cast<double>(size)));
        ys.push_back(std::log(mean));
      }
    }
    return xs.size() >= 3 ? fit_line(xs, ys) : LineFit{};
  };
  table.fit_vs_n = fit_of(by_n);
  table.fit_vs_m = fit_of(by_m);

  double sum_d = 0.0;
  for (int d : spec.block_dims) sum_d += d;
  table.ref_slope_n = -1.0 / sum_d;
  double theta = p > 1.0 ? theta_of(p, cfg.theta_delta).theta : 0.0;
  for (int i = 0; i < K; ++i) {
    double s_i = i < static_cast<int>(cfg.s.size())
                     ? cfg.s[static_cast<std::size_t>(i)]
                     : spec.block_dims[static_cast<std::size_t>(i)] + 0.5;
    table.ref_slopes_m.push_back(-theta / s_i);
  }
  return table;
}

LineFit rate_fit(std::span<const double> xs, std::span<const double> ys) {
  return fit_line(xs, ys);
}

}  // namespace wproj
