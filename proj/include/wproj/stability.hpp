#pragma once

#include <functional>
#include <span>
#include <vector>

#include "wproj/fit.hpp"
#include "wproj/measures.hpp"
#include "wproj/shadow.hpp"

namespace wproj {

/// Stability exponent theta(p): (1-delta)(p-1)^2/(p(p+1)) for 1 < p < 2 (the
/// open interval closed off by delta), 1/(6(p-1)) for p >= 2.
struct ThetaSpec {
  double p = 2.0;
  double delta = 0.01;
  double theta = 1.0 / 6.0;
};

ThetaSpec theta_of(double p, double delta = 0.01);

/// Shared displacement stencil: every atom splits uniformly across the same
/// offsets, all inside the radius-sigma l_p ball, so smoothing two measures
/// with the same spec is a Wasserstein non-expansion.
struct SmoothingSpec {
  double sigma = 0.0;
  std::vector<Point> offsets;

  /// The 2d+1 axis-aligned offsets {0, +-sigma e_k}.
  static SmoothingSpec axis_stencil(int dim, double sigma);
};

DiscreteMeasure smooth(const DiscreteMeasure& m, const SmoothingSpec& spec);
ProductMeasure smooth(const ProductMeasure& m, const SmoothingSpec& spec);

/// One stability evaluation: the constant-free lower bound W_p(mu, nu), the
/// observed shadow distance, and the upper-bound ingredients (reported, never
/// asserted, since the constant C is unknown).
struct StabilityReport {
  double lower = 0.0;
  double observed = 0.0;
  double rho_xi_term = 0.0;
  std::vector<double> marginal_terms;  // W_q(mu_i, nu_i)
  ThetaSpec theta;
  double slack_lower = 0.0;  // observed - lower; >= -1e-9 always
};

StabilityReport stability_report(const ProductMeasure& rho,
                                 const ProductMeasure& xi,
                                 const MarginalVector& mu,
                                 const MarginalVector& nu, double p, double q,
                                 double theta_delta = 0.01,
                                 std::size_t support_cap = 1'000'000);

/// r = W_p(S(rho;mu), S(xi;mu)) / W_p(rho, xi). A diagnostic only: the
/// guarantee is existential over shadow selections, so the canonical shadow
/// may exceed 1.
struct RatioReport {
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
  bool exact_zero = false;  // denominator below 1e-12, numerator treated as 0/0
};

RatioReport nonexpansive_diagnostic(const ProductMeasure& rho,
                                    const ProductMeasure& xi,
                                    const MarginalVector& mu, double p,
                                    std::size_t support_cap = 1'000'000);

/// Log-log regression of shadow distance against marginal perturbation size.
struct HolderFit {
  std::vector<double> log_x;  // log W_q(mu, nu_t)
  std::vector<double> log_y;  // log W_p(S(rho;mu), S(rho;nu_t))
  std::vector<double> scales;
  LineFit fit;
};

using PerturbationFamily = std::function<MarginalVector(double)>;

HolderFit holder_experiment(const ProductMeasure& rho, const MarginalVector& mu,
                            const PerturbationFamily& family, double p, double q,
                            std::span<const double> scales,
                            std::size_t support_cap = 1'000'000);

/// ||T_mu - T_nu||_{L2(lambda)} against W_1(mu, nu), with the transport maps
/// taken as barycentric maps of optimal plans conditioned on lambda.
struct MapStabilityPoint {
  double lhs = 0.0;       // L2(lambda) distance between the two maps
  double rhs_base = 0.0;  // W_1(mu, nu)
};

MapStabilityPoint map_stability_experiment(const DiscreteMeasure& lambda,
                                           const DiscreteMeasure& mu,
                                           const DiscreteMeasure& nu,
                                           double p = 2.0);

}  // namespace wproj
