#pragma once

#include <cstddef>
#include <vector>

#include "wproj/measures.hpp"

namespace wproj {

/// Dense equality-form LP: min c'x s.t. Ax = b, x >= 0.
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> objective;          // size num_vars
  std::vector<std::vector<double>> rows;  // each of size num_vars
  std::vector<double> rhs;
};

struct LpSolution {
  double value = 0.0;
  std::vector<double> x;
  std::vector<double> duals;  // one per constraint row
  double gap = 0.0;           // |c'x - b'y|
  int iterations = 0;
};

/// Primal simplex with Bland's rule (two phases, artificials kept through
/// phase 2 but barred from entering). Redundant equality rows are tolerated:
/// their artificials simply stay basic at zero.
LpSolution solve_lp(const LinearProgram& lp);

/// Variables gamma(x, y) with x ranging over the product of the mu supports
/// and y over supp rho; marginal-group constraints for every mu_i atom and
/// every rho atom (last rho row dropped), objective sum d(x,y)^p gamma.
struct ProjectionLp {
  LinearProgram lp;
  std::vector<std::size_t> x_strides;  // mixed-radix decoding of x indices
  std::size_t num_x = 0;
  std::size_t num_y = 0;
};

ProjectionLp build_projection_lp(const ProductMeasure& rho,
                                 const MarginalVector& mu,
                                 const MetricSpec& spec,
                                 std::size_t var_cap = 20'000);

struct CertificateEntry {
  std::size_t x;  // flat index over the product of mu supports
  std::size_t y;  // rho atom index
  double mass;
};

/// Independent optimum for the projection problem: the LP value (cost units),
/// the distance (its 1/p-th root; the threshold itself for p = inf), an
/// optimal multimarginal coupling, its x-marginal, and the LP duals (empty
/// for p = inf, where only feasibility subproblems are solved).
struct ProjectionCertificate {
  double value = 0.0;     // cost units (= distance for p = inf)
  double distance = 0.0;  // W_p value
  std::vector<CertificateEntry> coupling;
  ProductMeasure projection;  // x-marginal of the coupling
  std::vector<double> duals;
  double gap = 0.0;
};

ProjectionCertificate project_oracle(const ProductMeasure& rho,
                                     const MarginalVector& mu,
                                     const MetricSpec& spec,
                                     std::size_t var_cap = 20'000);

}  // namespace wproj
