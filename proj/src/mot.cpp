#include "wproj/mot.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "wproj/errors.hpp"

namespace wproj {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kEnterTol = 1e-10;

// Dense two-phase tableau simplex, minimization. Artificial columns are kept
// through phase 2 (barred from entering) so the final reduced-cost row under
// them yields the duals directly.
class DenseSimplex {
 public:
  explicit DenseSimplex(const LinearProgram& lp)
      : n_(lp.num_vars), m_(lp.rows.size()), lp_(lp) {
    width_ = n_ + m_ + 1;
    tab_.assign(m_, std::vector<double>(width_, 0.0));
    basis_.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      double sign = lp.rhs[r] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) tab_[r][j] = sign * lp.rows[r][j];
      tab_[r][n_ + r] = 1.0;
      tab_[r][width_ - 1] = sign * lp.rhs[r];
      basis_[r] = n_ + r;
    }
  }

  // Returns false when phase 1 cannot reach zero (infeasible).
  bool phase1() {
    obj_.assign(width_, 0.0);
    // w = sum of artificials; express in nonbasic terms.
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t j = 0; j < width_; ++j) obj_[j] -= tab_[r][j];
    }
    for (std::size_t r = 0; r < m_; ++r) obj_[n_ + r] = 0.0;
    iterate(/*allow_artificial=*/false);
    if (-obj_[width_ - 1] > 1e-9) return false;
    drive_out_artificials();
    return true;
  }

  // Pivot basic zero artificials onto any original column; a row that is
  // entirely zero on the original columns is redundant and can never change
  // again, so its artificial may stay basic at zero.
  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      std::size_t col = width_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(tab_[r][j]) > kPivotTol) {
          col = j;
          break;
        }
      }
      if (col < width_) pivot(r, col);
    }
  }

  void phase2() {
    obj_.assign(width_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) obj_[j] = lp_.objective[j];
    for (std::size_t r = 0; r < m_; ++r) {
      double cb = basis_[r] < n_ ? lp_.objective[basis_[r]] : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) obj_[j] -= cb * tab_[r][j];
    }
    iterate(/*allow_artificial=*/false);
  }

  LpSolution extract() const {
    LpSolution s;
    s.x.assign(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) s.x[basis_[r]] = std::max(0.0, tab_[r][width_ - 1]);
    }
    CompensatedSum val;
    for (std::size_t j = 0; j < n_; ++j) {
      if (s.x[j] != 0.0) val.add(lp_.objective[j] * s.x[j]);
    }
    s.value = val.value();
    s.duals.assign(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) s.duals[r] = -obj_[n_ + r];
    // Rows that were sign-flipped need their dual flipped back.
    for (std::size_t r = 0; r < m_; ++r) {
      if (lp_.rhs[r] < 0.0) s.duals[r] = -s.duals[r];
    }
    CompensatedSum by;
    for (std::size_t r = 0; r < m_; ++r) by.add(lp_.rhs[r] * s.duals[r]);
    s.gap = std::abs(s.value - by.value());
    s.iterations = iterations_;

    // Dual feasibility certificate on the original columns.
    for (std::size_t j = 0; j < n_; ++j) {
      if (obj_[j] < -1e-9) {
        throw SolverError("solve_lp: dual feasibility check failed");
      }
    }
    return s;
  }

 private:
  void iterate(bool allow_artificial) {
    const std::size_t enter_limit = allow_artificial ? n_ + m_ : n_;
    const int max_iter = 50000 + 50 * static_cast<int>(n_ + m_);
    for (int it = 0; it < max_iter; ++it) {
      // Bland: smallest eligible column with negative reduced cost.
      std::size_t enter = width_;
      for (std::size_t j = 0; j < enter_limit; ++j) {
        if (obj_[j] < -kEnterTol) {
          enter = j;
          break;
        }
      }
      if (enter == width_) {
        iterations_ += it;
        return;
      }
      // Ratio test; ties by smallest basis index (Bland).
      std::size_t leave = m_;
      double best = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        if (tab_[r][enter] > kPivotTol) {
          double ratio = tab_[r][width_ - 1] / tab_[r][enter];
          if (leave == m_ || ratio < best - 1e-15 ||
              (std::abs(ratio - best) <= 1e-15 && basis_[r] < basis_[leave])) {
            leave = r;
            best = ratio;
          }
        }
      }
      if (leave == m_) {
        throw SolverError("solve_lp: unbounded direction encountered");
      }
      pivot(leave, enter);
    }
    throw SolverError("solve_lp: iteration cap reached");
  }

  void pivot(std::size_t r, std::size_t j) {
    double inv = 1.0 / tab_[r][j];
    for (std::size_t k = 0; k < width_; ++k) tab_[r][k] *= inv;
    tab_[r][j] = 1.0;
    for (std::size_t q = 0; q < m_; ++q) {
      if (q == r) continue;
      double f = tab_[q][j];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < width_; ++k) tab_[q][k] -= f * tab_[r][k];
      tab_[q][j] = 0.0;
    }
    double f = obj_[j];
    if (f != 0.0) {
      for (std::size_t k = 0; k < width_; ++k) obj_[k] -= f * tab_[r][k];
      obj_[j] = 0.0;
    }
    basis_[r] = j;
  }

  std::size_t n_, m_, width_;
  const LinearProgram& lp_;
  std::vector<std::vector<double>> tab_;
  std::vector<double> obj_;
  std::vector<std::size_t> basis_;
  int iterations_ = 0;
};

std::optional<LpSolution> try_solve(const LinearProgram& lp) {
  if (lp.rows.size() != lp.rhs.size()) throw InputError("solve_lp: rows/rhs mismatch");
  for (const auto& row : lp.rows) {
    if (row.size() != lp.num_vars) throw InputError("solve_lp: ragged row");
  }
  DenseSimplex simplex(lp);
  if (!simplex.phase1()) return std::nullopt;
  simplex.phase2();
  return simplex.extract();
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  auto s = try_solve(lp);
  if (!s) throw SolverError("solve_lp: infeasible program");
  return *s;
}

ProjectionLp build_projection_lp(const ProductMeasure& rho,
                                 const MarginalVector& mu,
                                 const MetricSpec& spec, std::size_t var_cap) {
  if (spec.is_inf()) {
    throw InputError("build_projection_lp: finite p required");
  }
  if (mu.blocks() != spec.blocks() || rho.spec.blocks() != spec.blocks()) {
    throw InputError("build_projection_lp: block structure mismatch");
  }
  const int K = spec.blocks();
  ProjectionLp out;
  out.num_y = rho.base.size();
  out.x_strides.assign(static_cast<std::size_t>(K), 1);
  std::size_t num_x = 1;
  for (int i = 0; i < K; ++i) {
    out.x_strides[static_cast<std::size_t>(i)] = num_x;
    num_x *= mu.components[static_cast<std::size_t>(i)].size();
  }
  out.num_x = num_x;
  if (num_x * out.num_y > var_cap) {
    throw SizeError("build_projection_lp: " + std::to_string(num_x * out.num_y) +
                    " variables exceed cap " + std::to_string(var_cap));
  }

  LinearProgram& lp = out.lp;
  lp.num_vars = num_x * out.num_y;
  lp.objective.assign(lp.num_vars, 0.0);

  // Objective: d(x, y)^p. Assemble x coordinates once per flat index.
  const int dim = spec.total_dim();
  std::vector<double> xc(static_cast<std::size_t>(dim));
  for (std::size_t x = 0; x < num_x; ++x) {
    double* dst = xc.data();
    for (int i = 0; i < K; ++i) {
      const auto& comp = mu.components[static_cast<std::size_t>(i)];
      std::size_t ai = (x / out.x_strides[static_cast<std::size_t>(i)]) % comp.size();
      auto a = comp.atom(ai);
      for (double c : a) *dst++ = c;
    }
    for (std::size_t y = 0; y < out.num_y; ++y) {
      lp.objective[x * out.num_y + y] = ground_cost(xc, rho.base.atom(y), spec);
    }
  }

  // Marginal-group rows: one per mu_i atom, then one per rho atom except the
  // last (dropped; remaining redundancies are absorbed by phase-1
  // artificials staying basic at zero).
  for (int i = 0; i < K; ++i) {
    const auto& comp = mu.components[static_cast<std::size_t>(i)];
    for (std::size_t a = 0; a < comp.size(); ++a) {
      std::vector<double> row(lp.num_vars, 0.0);
      for (std::size_t x = 0; x < num_x; ++x) {
        if ((x / out.x_strides[static_cast<std::size_t>(i)]) % comp.size() != a) continue;
        for (std::size_t y = 0; y < out.num_y; ++y) row[x * out.num_y + y] = 1.0;
      }
      lp.rows.push_back(std::move(row));
      lp.rhs.push_back(comp.weight(a));
    }
  }
  for (std::size_t y = 0; y + 1 < out.num_y; ++y) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (std::size_t x = 0; x < num_x; ++x) row[x * out.num_y + y] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(rho.base.weight(y));
  }
  return out;
}

namespace {

Point product_atom(const MarginalVector& mu, const std::vector<std::size_t>& strides,
                   std::size_t x, int dim) {
  Point coords;
  coords.reserve(static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < strides.size(); ++i) {
    const auto& comp = mu.components[i];
    std::size_t ai = (x / strides[i]) % comp.size();
    auto a = comp.atom(ai);
    coords.insert(coords.end(), a.begin(), a.end());
  }
  return coords;
}

ProductMeasure x_marginal(const std::vector<CertificateEntry>& coupling,
                          const MarginalVector& mu,
                          const std::vector<std::size_t>& strides,
                          const MetricSpec& spec) {
  // Aggregate mass per x index, keeping first-seen order.
  std::vector<std::size_t> order;
  std::vector<double> mass;
  std::vector<std::ptrdiff_t> slot;
  for (const CertificateEntry& e : coupling) {
    std::ptrdiff_t found = -1;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (order[k] == e.x) {
        found = static_cast<std::ptrdiff_t>(k);
        break;
      }
    }
    if (found < 0) {
      order.push_back(e.x);
      mass.push_back(e.mass);
    } else {
      mass[static_cast<std::size_t>(found)] += e.mass;
    }
  }
  const int dim = spec.total_dim();
  std::vector<double> coords;
  coords.reserve(order.size() * static_cast<std::size_t>(dim));
  for (std::size_t x : order) {
    Point a = product_atom(mu, strides, x, dim);
    coords.insert(coords.end(), a.begin(), a.end());
  }
  return ProductMeasure(
      DiscreteMeasure::from_flat(dim, std::move(coords), std::move(mass)), spec);
}

ProjectionCertificate oracle_finite(const ProductMeasure& rho,
                                    const MarginalVector& mu,
                                    const MetricSpec& spec,
                                    std::size_t var_cap) {
  ProjectionLp plp = build_projection_lp(rho, mu, spec, var_cap);
  LpSolution sol = solve_lp(plp.lp);
  ProjectionCertificate cert;
  cert.value = std::max(0.0, sol.value);
  cert.distance = std::pow(cert.value, 1.0 / spec.p);
  for (std::size_t v = 0; v < sol.x.size(); ++v) {
    if (sol.x[v] > 0.0) {
      cert.coupling.push_back({v / plp.num_y, v % plp.num_y, sol.x[v]});
    }
  }
  cert.duals = sol.duals;
  cert.gap = sol.gap;
  if (cert.gap > 1e-8) throw SolverError("project_oracle: duality gap too large");
  cert.projection = x_marginal(cert.coupling, mu, plp.x_strides, spec);
  return cert;
}

// Feasibility LP restricted to pairs of cost <= threshold; variables are the
// allowed pairs only.
bool threshold_feasible(const ProductMeasure& rho, const MarginalVector& mu,
                        const std::vector<double>& pair_cost,
                        const std::vector<std::size_t>& strides,
                        std::size_t num_y, double threshold,
                        std::vector<CertificateEntry>* coupling) {
  std::vector<std::size_t> allowed;
  for (std::size_t v = 0; v < pair_cost.size(); ++v) {
    if (pair_cost[v] <= threshold) allowed.push_back(v);
  }
  LinearProgram lp;
  lp.num_vars = allowed.size();
  lp.objective.assign(lp.num_vars, 0.0);
  const int K = static_cast<int>(strides.size());
  for (int i = 0; i < K; ++i) {
    const auto& comp = mu.components[static_cast<std::size_t>(i)];
    for (std::size_t a = 0; a < comp.size(); ++a) {
      std::vector<double> row(lp.num_vars, 0.0);
      for (std::size_t k = 0; k < allowed.size(); ++k) {
        std::size_t x = allowed[k] / num_y;
        if ((x / strides[static_cast<std::size_t>(i)]) % comp.size() == a) row[k] = 1.0;
      }
      lp.rows.push_back(std::move(row));
      lp.rhs.push_back(comp.weight(a));
    }
  }
  for (std::size_t y = 0; y + 1 < num_y; ++y) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (std::size_t k = 0; k < allowed.size(); ++k) {
      if (allowed[k] % num_y == y) row[k] = 1.0;
    }
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(rho.base.weight(y));
  }
  auto sol = try_solve(lp);
  if (!sol) return false;
  if (coupling) {
    coupling->clear();
    for (std::size_t k = 0; k < allowed.size(); ++k) {
      if (sol->x[k] > 0.0) {
        coupling->push_back({allowed[k] / num_y, allowed[k] % num_y, sol->x[k]});
      }
    }
  }
  return true;
}

ProjectionCertificate oracle_inf(const ProductMeasure& rho,
                                 const MarginalVector& mu, const MetricSpec& spec,
                                 std::size_t var_cap) {
  const int K = spec.blocks();
  std::size_t num_y = rho.base.size();
  std::vector<std::size_t> strides(static_cast<std::size_t>(K), 1);
  std::size_t num_x = 1;
  for (int i = 0; i < K; ++i) {
    strides[static_cast<std::size_t>(i)] = num_x;
    num_x *= mu.components[static_cast<std::size_t>(i)].size();
  }
  if (num_x * num_y > var_cap) {
    throw SizeError("project_oracle: variable cap exceeded");
  }
  const int dim = spec.total_dim();
  std::vector<double> pair_cost(num_x * num_y);
  for (std::size_t x = 0; x < num_x; ++x) {
    Point xc = product_atom(mu, strides, x, dim);
    for (std::size_t y = 0; y < num_y; ++y) {
      pair_cost[x * num_y + y] = ground_distance(xc, rho.base.atom(y), spec);
    }
  }
  std::vector<double> levels = pair_cost;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (threshold_feasible(rho, mu, pair_cost, strides, num_y, levels[mid],
                           nullptr)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  ProjectionCertificate cert;
  if (!threshold_feasible(rho, mu, pair_cost, strides, num_y, levels[lo],
                          &cert.coupling)) {
    throw SolverError("project_oracle: threshold search failed");
  }
  cert.value = levels[lo];
  cert.distance = levels[lo];
  cert.projection = x_marginal(cert.coupling, mu, strides, spec);
  return cert;
}

}  // namespace

ProjectionCertificate project_oracle(const ProductMeasure& rho,
                                     const MarginalVector& mu,
                                     const MetricSpec& spec, std::size_t var_cap) {
  if (mu.blocks() != spec.blocks() || rho.spec.blocks() != spec.blocks()) {
    throw InputError("project_oracle: block structure mismatch");
  }
  return spec.is_inf() ? oracle_inf(rho, mu, spec, var_cap)
                       : oracle_finite(rho, mu, spec, var_cap);
}

}  // namespace wproj
