#include "wproj/stability.hpp"

#include <algorithm>
#include <cmath>

#include "wproj/errors.hpp"
#include "wproj/ot.hpp"

namespace wproj {

ThetaSpec theta_of(double p, double delta) {
  if (!(p > 1.0)) throw InputError("theta_of: p must exceed 1");
  if (std::isinf(p)) throw InputError("theta_of: p must be finite");
  ThetaSpec t;
  t.p = p;
  t.delta = delta;
  if (p < 2.0) {
    if (!(delta > 0.0 && delta < 1.0)) {
      throw InputError("theta_of: delta must lie in (0, 1)");
    }
    t.theta = (1.0 - delta) * (p - 1.0) * (p - 1.0) / (p * (p + 1.0));
  } else {
    t.theta = 1.0 / (6.0 * (p - 1.0));
  }
  return t;
}

SmoothingSpec SmoothingSpec::axis_stencil(int dim, double sigma) {
  if (dim < 1) throw InputError("axis_stencil: dim must be >= 1");
  if (!(sigma > 0.0)) throw InputError("axis_stencil: sigma must be positive");
  SmoothingSpec s;
  s.sigma = sigma;
  s.offsets.emplace_back(static_cast<std::size_t>(dim), 0.0);
  for (int k = 0; k < dim; ++k) {
    Point plus(static_cast<std::size_t>(dim), 0.0);
    plus[static_cast<std::size_t>(k)] = sigma;
    Point minus(static_cast<std::size_t>(dim), 0.0);
    minus[static_cast<std::size_t>(k)] = -sigma;
    s.offsets.push_back(std::move(plus));
    s.offsets.push_back(std::move(minus));
  }
  return s;
}

DiscreteMeasure smooth(const DiscreteMeasure& m, const SmoothingSpec& spec) {
  if (spec.offsets.empty()) throw InputError("smooth: empty offset stencil");
  for (const Point& o : spec.offsets) {
    if (static_cast<int>(o.size()) != m.dim()) {
      throw InputError("smooth: offset dimension mismatch");
    }
  }
  const double share = 1.0 / static_cast<double>(spec.offsets.size());
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(m.size() * spec.offsets.size() * static_cast<std::size_t>(m.dim()));
  weights.reserve(m.size() * spec.offsets.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto a = m.atom(i);
    for (const Point& o : spec.offsets) {
      for (int c = 0; c < m.dim(); ++c) {
        coords.push_back(a[static_cast<std::size_t>(c)] + o[static_cast<std::size_t>(c)]);
      }
      weights.push_back(m.weight(i) * share);
    }
  }
  return DiscreteMeasure::from_flat(m.dim(), std::move(coords), std::move(weights));
}

ProductMeasure smooth(const ProductMeasure& m, const SmoothingSpec& spec) {
  return ProductMeasure(smooth(m.base, spec), m.spec);
}

StabilityReport stability_report(const ProductMeasure& rho,
                                 const ProductMeasure& xi,
                                 const MarginalVector& mu,
                                 const MarginalVector& nu, double p, double q,
                                 double theta_delta, std::size_t support_cap) {
  MetricSpec spec(p, rho.spec.block_dims);
  if (xi.spec.block_dims != rho.spec.block_dims) {
    throw InputError("stability_report: rho/xi block mismatch");
  }
  StabilityReport rep;
  rep.theta = p > 1.0 && !std::isinf(p) ? theta_of(p, theta_delta) : ThetaSpec{p, theta_delta, 0.0};

  ShadowResult s_rho = compose_shadow(rho, mu, spec, support_cap);
  ShadowResult s_xi = compose_shadow(xi, nu, spec, support_cap);

  rep.lower = marginal_vector_distance(mu, nu, spec);
  rep.observed = solve_wasserstein(s_rho.shadow.base, s_xi.shadow.base, spec).value;
  rep.rho_xi_term = solve_wasserstein(rho.base, xi.base, spec).value;
  rep.marginal_terms = marginal_component_distances(mu, nu, spec, q);
  rep.slack_lower = rep.observed - rep.lower;
  return rep;
}

RatioReport nonexpansive_diagnostic(const ProductMeasure& rho,
                                    const ProductMeasure& xi,
                                    const MarginalVector& mu, double p,
                                    std::size_t support_cap) {
  MetricSpec spec(p, rho.spec.block_dims);
  ShadowResult s_rho = compose_shadow(rho, mu, spec, support_cap);
  ShadowResult s_xi = compose_shadow(xi, mu, spec, support_cap);
  RatioReport r;
  r.numerator = solve_wasserstein(s_rho.shadow.base, s_xi.shadow.base, spec).value;
  r.denominator = solve_wasserstein(rho.base, xi.base, spec).value;
  if (r.denominator < 1e-12) {
    r.exact_zero = true;
    r.ratio = 0.0;
  } else {
    r.ratio = r.numerator / r.denominator;
  }
  return r;
}

HolderFit holder_experiment(const ProductMeasure& rho, const MarginalVector& mu,
                            const PerturbationFamily& family, double p, double q,
                            std::span<const double> scales,
                            std::size_t support_cap) {
  if (scales.size() < 3) throw InputError("holder_experiment: need >= 3 scales");
  MetricSpec spec(p, rho.spec.block_dims);
  MetricSpec qspec(q, rho.spec.block_dims);
  ShadowResult base = compose_shadow(rho, mu, spec, support_cap);

  HolderFit out;
  out.scales.assign(scales.begin(), scales.end());
  std::sort(out.scales.begin(), out.scales.end());
  for (double t : out.scales) {
    MarginalVector nu = family(t);
    double x = marginal_vector_distance(mu, nu, qspec);
    ShadowResult pert = compose_shadow(rho, nu, spec, support_cap);
    double y = solve_wasserstein(base.shadow.base, pert.shadow.base, spec).value;
    if (!(x > 0.0) || !(y > 0.0)) {
      throw ExperimentError("holder_experiment: degenerate zero distance at scale " +
                            std::to_string(t));
    }
    out.log_x.push_back(std::log(x));
    out.log_y.push_back(std::log(y));
  }
  out.fit = fit_line(out.log_x, out.log_y);
  return out;
}

MapStabilityPoint map_stability_experiment(const DiscreteMeasure& lambda,
                                           const DiscreteMeasure& mu,
                                           const DiscreteMeasure& nu, double p) {
  if (lambda.dim() != mu.dim() || lambda.dim() != nu.dim()) {
    throw InputError("map_stability_experiment: dimension mismatch");
  }
  MetricSpec spec(p, {lambda.dim()});
  // Condition the optimal plans on lambda: solve from mu (resp. nu) to lambda
  // and take barycentric means per lambda atom.
  BarycentricMap t_mu = barycentric_map(solve_ot(mu, lambda, spec).plan);
  BarycentricMap t_nu = barycentric_map(solve_ot(nu, lambda, spec).plan);
  if (t_mu.targets.size() != lambda.size() || t_nu.targets.size() != lambda.size()) {
    throw SolverError("map_stability_experiment: map undefined on some atoms");
  }
  CompensatedSum acc;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    double sq = 0.0;
    for (int c = 0; c < lambda.dim(); ++c) {
      double d = t_mu.means[j][static_cast<std::size_t>(c)] -
                 t_nu.means[j][static_cast<std::size_t>(c)];
      sq += d * d;
    }
    acc.add(lambda.weight(j) * sq);
  }
  MapStabilityPoint out;
  out.lhs = std::sqrt(std::max(0.0, acc.value()));
  out.rhs_base = solve_ot(mu, nu, MetricSpec(1.0, {mu.dim()})).value;
  return out;
}

}  // namespace wproj
