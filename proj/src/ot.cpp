#include "wproj/ot.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "wproj/errors.hpp"
#include "wproj/kernels.hpp"

namespace wproj {

CostMatrix build_cost_matrix(const DiscreteMeasure& source,
                             const DiscreteMeasure& target,
                             const MetricSpec& spec, Parallelism par) {
  if (source.dim() != target.dim() || source.dim() != spec.total_dim()) {
    throw InputError("build_cost_matrix: dimension mismatch");
  }
  CostMatrix m;
  m.rows = source.size();
  m.cols = target.size();
  m.p = spec.p;
  m.entries = pairwise_cost(source, target, spec, par);
  return m;
}

TransportPlan::TransportPlan(DiscreteMeasure source, DiscreteMeasure target,
                             std::vector<double> table)
    : source_(std::move(source)), target_(std::move(target)), table_(std::move(table)) {
  const std::size_t m = source_.size(), n = target_.size();
  if (table_.size() != m * n) throw InputError("TransportPlan: bad table size");
  for (double v : table_) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw InputError("TransportPlan: entries must be nonnegative finite");
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    CompensatedSum s;
    for (std::size_t j = 0; j < n; ++j) s.add(table_[i * n + j]);
    if (std::abs(s.value() - source_.weight(i)) > 1e-9) {
      throw InputError("TransportPlan: row sum deviates from source weight");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    CompensatedSum s;
    for (std::size_t i = 0; i < m; ++i) s.add(table_[i * n + j]);
    if (std::abs(s.value() - target_.weight(j)) > 1e-9) {
      throw InputError("TransportPlan: column sum deviates from target weight");
    }
  }
}

TransportPlan TransportPlan::transposed() const {
  const std::size_t m = rows(), n = cols();
  std::vector<double> t(n * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[j * m + i] = table_[i * n + j];
  }
  return TransportPlan(target_, source_, std::move(t));
}

std::vector<TransportPlan::Entry> TransportPlan::nonzeros() const {
  std::vector<Entry> out;
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t j = 0; j < cols(); ++j) {
      double v = at(i, j);
      if (v > 0.0) out.push_back({i, j, v});
    }
  }
  return out;
}

namespace {

// Flow value with the symbolic perturbation coefficient: supplies carry
// a_i + 1*eps, the last demand carries m*eps, so no basic flow is ever an
// exact (lexicographic) zero and the simplex cannot cycle or stall on
// degenerate pivots.
struct Perturbed {
  double v = 0.0;
  double e = 0.0;

  bool lex_less(const Perturbed& o) const {
    if (v != o.v) return v < o.v;
    return e < o.e;
  }
  bool lex_zero() const { return v == 0.0 && e == 0.0; }
  Perturbed operator-(const Perturbed& o) const { return {v - o.v, e - o.e}; }
  void operator-=(const Perturbed& o) {
    v -= o.v;
    e -= o.e;
  }
  void operator+=(const Perturbed& o) {
    v += o.v;
    e += o.e;
  }
};

struct BasisCell {
  int row, col;
  Perturbed flow;
};

class TransportSimplex {
 public:
  TransportSimplex(const CostMatrix& cost, std::span<const double> supply,
                   std::span<const double> demand)
      : cost_(cost),
        m_(static_cast<int>(supply.size())),
        n_(static_cast<int>(demand.size())) {
    northwest_corner(supply, demand);
  }

  // Returns the iteration count. Throws SolverError if the optimality
  // certificate cannot be established.
  int run() {
    const int max_iter = 1000 * (m_ + n_) + 100000;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
      compute_duals();
      int er, ec;
      if (!find_entering(er, ec)) break;
      pivot(er, ec);
    }
    if (iter >= max_iter) {
      throw SolverError("transportation simplex: iteration cap reached");
    }
    compute_duals();
    // Certificate: every reduced cost nonnegative up to 1e-9.
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (reduced(i, j) < -1e-9) {
          throw SolverError("transportation simplex: optimality check failed");
        }
      }
    }
    return iter;
  }

  const std::vector<double>& row_duals() const { return u_; }
  const std::vector<double>& col_duals() const { return v_; }

  std::vector<double> extract_table() const {
    std::vector<double> table(static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_), 0.0);
    for (const BasisCell& b : basis_) {
      double v = b.flow.v;
      if (v < 0.0) v = 0.0;  // clip fp residue
      table[static_cast<std::size_t>(b.row) * static_cast<std::size_t>(n_) +
            static_cast<std::size_t>(b.col)] = v;
    }
    return table;
  }

 private:
  double c(int i, int j) const {
    return cost_.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  double reduced(int i, int j) const { return c(i, j) - u_[static_cast<std::size_t>(i)] - v_[static_cast<std::size_t>(j)]; }

  void northwest_corner(std::span<const double> supply, std::span<const double> demand) {
    std::vector<Perturbed> s(static_cast<std::size_t>(m_)), d(static_cast<std::size_t>(n_));
    for (int i = 0; i < m_; ++i) s[static_cast<std::size_t>(i)] = {supply[static_cast<std::size_t>(i)], 1.0};
    for (int j = 0; j < n_; ++j) d[static_cast<std::size_t>(j)] = {demand[static_cast<std::size_t>(j)], 0.0};
    d[static_cast<std::size_t>(n_ - 1)].e = static_cast<double>(m_);

    basis_.clear();
    basis_.reserve(static_cast<std::size_t>(m_ + n_ - 1));
    int i = 0, j = 0;
    while (true) {
      Perturbed& rs = s[static_cast<std::size_t>(i)];
      Perturbed& rd = d[static_cast<std::size_t>(j)];
      Perturbed alloc = rs.lex_less(rd) ? rs : rd;
      basis_.push_back({i, j, alloc});
      rs -= alloc;
      rd -= alloc;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (rs.lex_zero() && i < m_ - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Assigns duals by walking the basis tree from row node 0 (u_0 = 0).
  void compute_duals() {
    const int nodes = m_ + n_;
    adj_.assign(static_cast<std::size_t>(nodes), {});
    for (std::size_t b = 0; b < basis_.size(); ++b) {
      int rn = basis_[b].row;
      int cn = m_ + basis_[b].col;
      adj_[static_cast<std::size_t>(rn)].push_back({cn, static_cast<int>(b)});
      adj_[static_cast<std::size_t>(cn)].push_back({rn, static_cast<int>(b)});
    }
    u_.assign(static_cast<std::size_t>(m_), 0.0);
    v_.assign(static_cast<std::size_t>(n_), 0.0);
    std::vector<char> vis(static_cast<std::size_t>(nodes), 0);
    std::queue<int> q;
    q.push(0);
    vis[0] = 1;
    while (!q.empty()) {
      int node = q.front();
      q.pop();
      for (auto [next, b] : adj_[static_cast<std::size_t>(node)]) {
        if (vis[static_cast<std::size_t>(next)]) continue;
        vis[static_cast<std::size_t>(next)] = 1;
        int bi = basis_[static_cast<std::size_t>(b)].row;
        int bj = basis_[static_cast<std::size_t>(b)].col;
        if (next >= m_) {
          v_[static_cast<std::size_t>(bj)] = c(bi, bj) - u_[static_cast<std::size_t>(bi)];
        } else {
          u_[static_cast<std::size_t>(bi)] = c(bi, bj) - v_[static_cast<std::size_t>(bj)];
        }
        q.push(next);
      }
    }
    for (char f : vis) {
      if (!f) throw SolverError("transportation simplex: basis not spanning");
    }
  }

  // Bland: the first cell in (row, col) order with negative reduced cost.
  bool find_entering(int& er, int& ec) const {
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (reduced(i, j) < -1e-11) {
          er = i;
          ec = j;
          return true;
        }
      }
    }
    return false;
  }

  void pivot(int er, int ec) {
    // Tree path from row node er to col node m_+ec.
    const int nodes = m_ + n_;
    std::vector<int> parent_edge(static_cast<std::size_t>(nodes), -1);
    std::vector<int> parent_node(static_cast<std::size_t>(nodes), -1);
    std::vector<char> vis(static_cast<std::size_t>(nodes), 0);
    std::queue<int> q;
    q.push(er);
    vis[static_cast<std::size_t>(er)] = 1;
    while (!q.empty()) {
      int node = q.front();
      q.pop();
      if (node == m_ + ec) break;
      for (auto [next, b] : adj_[static_cast<std::size_t>(node)]) {
        if (vis[static_cast<std::size_t>(next)]) continue;
        vis[static_cast<std::size_t>(next)] = 1;
        parent_edge[static_cast<std::size_t>(next)] = b;
        parent_node[static_cast<std::size_t>(next)] = node;
        q.push(next);
      }
    }
    if (!vis[static_cast<std::size_t>(m_ + ec)]) {
      throw SolverError("transportation simplex: entering cell disconnected");
    }

    // Walk back from the col node; alternate -,+,-,... (the entering cell
    // itself takes +theta).
    std::vector<int> minus_edges, plus_edges;
    int node = m_ + ec;
    bool minus = true;
    while (node != er) {
      int b = parent_edge[static_cast<std::size_t>(node)];
      (minus ? minus_edges : plus_edges).push_back(b);
      node = parent_node[static_cast<std::size_t>(node)];
      minus = !minus;
    }

    // theta = lexicographic min over the minus cells; ties broken by
    // (row, col) of the cell.
    int leave = -1;
    for (int b : minus_edges) {
      if (leave < 0) {
        leave = b;
        continue;
      }
      const BasisCell& cand = basis_[static_cast<std::size_t>(b)];
      const BasisCell& best = basis_[static_cast<std::size_t>(leave)];
      if (cand.flow.lex_less(best.flow)) {
        leave = b;
      } else if (!best.flow.lex_less(cand.flow)) {
        if (cand.row < best.row || (cand.row == best.row && cand.col < best.col)) {
          leave = b;
        }
      }
    }
    Perturbed theta = basis_[static_cast<std::size_t>(leave)].flow;
    for (int b : minus_edges) basis_[static_cast<std::size_t>(b)].flow -= theta;
    for (int b : plus_edges) basis_[static_cast<std::size_t>(b)].flow += theta;
    basis_[static_cast<std::size_t>(leave)] = {er, ec, theta};
    rebuild_adjacency();
  }

  void rebuild_adjacency() {
    adj_.assign(static_cast<std::size_t>(m_ + n_), {});
    for (std::size_t b = 0; b < basis_.size(); ++b) {
      int rn = basis_[b].row;
      int cn = m_ + basis_[b].col;
      adj_[static_cast<std::size_t>(rn)].push_back({cn, static_cast<int>(b)});
      adj_[static_cast<std::size_t>(cn)].push_back({rn, static_cast<int>(b)});
    }
  }

  const CostMatrix& cost_;
  int m_, n_;
  std::vector<BasisCell> basis_;
  std::vector<std::vector<std::pair<int, int>>> adj_;  // node -> (node, basis idx)
  std::vector<double> u_, v_;
};

double table_cost(const std::vector<double>& table, const CostMatrix& cost) {
  CompensatedSum s;
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (table[k] > 0.0) s.add(table[k] * cost.entries[k]);
  }
  double v = s.value();
  return v < 0.0 ? 0.0 : v;
}

}  // namespace

OTResult solve_ot(const DiscreteMeasure& source, const DiscreteMeasure& target,
                  const MetricSpec& spec) {
  if (spec.is_inf()) throw InputError("solve_ot: use solve_ot_inf for p = inf");
  CostMatrix cost = build_cost_matrix(source, target, spec);
  TransportSimplex simplex(cost, source.weights(), target.weights());
  int iterations = simplex.run();
  std::vector<double> table = simplex.extract_table();
  double total = table_cost(table, cost);
  OTResult res{TransportPlan(source, target, std::move(table)),
               std::pow(total, 1.0 / spec.p),
               total,
               iterations,
               simplex.row_duals(),
               simplex.col_duals()};
  return res;
}

namespace {

// Max-flow feasibility for couplings supported on edges of cost <= threshold.
// Augmenting paths always bottleneck on a supply or demand edge (interior
// capacities exceed the total mass), so at most m+n augmentations occur.
class BottleneckFeasibility {
 public:
  BottleneckFeasibility(const CostMatrix& cost, std::span<const double> supply,
                        std::span<const double> demand)
      : cost_(cost),
        m_(static_cast<int>(supply.size())),
        n_(static_cast<int>(demand.size())),
        supply_(supply.begin(), supply.end()),
        demand_(demand.begin(), demand.end()) {}

  // Returns achieved flow (== 1 when a coupling exists) and fills `table`.
  double max_flow(double threshold, std::vector<double>& table) {
    const int nodes = m_ + n_ + 2;
    const int s = m_ + n_, t = m_ + n_ + 1;
    cap_.assign(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes), 0.0);
    auto capref = [&](int a, int b) -> double& {
      return cap_[static_cast<std::size_t>(a) * static_cast<std::size_t>(nodes) +
                  static_cast<std::size_t>(b)];
    };
    for (int i = 0; i < m_; ++i) capref(s, i) = supply_[static_cast<std::size_t>(i)];
    for (int j = 0; j < n_; ++j) capref(m_ + j, t) = demand_[static_cast<std::size_t>(j)];
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (cost_.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) <= threshold) {
          capref(i, m_ + j) = 2.0;  // larger than total mass
        }
      }
    }
    double flow = 0.0;
    std::vector<int> parent(static_cast<std::size_t>(nodes));
    while (true) {
      std::fill(parent.begin(), parent.end(), -1);
      parent[static_cast<std::size_t>(s)] = s;
      std::queue<int> q;
      q.push(s);
      while (!q.empty() && parent[static_cast<std::size_t>(t)] < 0) {
        int a = q.front();
        q.pop();
        for (int b = 0; b < nodes; ++b) {
          if (parent[static_cast<std::size_t>(b)] < 0 && capref(a, b) > 1e-15) {
            parent[static_cast<std::size_t>(b)] = a;
            q.push(b);
          }
        }
      }
      if (parent[static_cast<std::size_t>(t)] < 0) break;
      double aug = kInf;
      for (int b = t; b != s; b = parent[static_cast<std::size_t>(b)]) {
        aug = std::min(aug, capref(parent[static_cast<std::size_t>(b)], b));
      }
      for (int b = t; b != s; b = parent[static_cast<std::size_t>(b)]) {
        int a = parent[static_cast<std::size_t>(b)];
        capref(a, b) -= aug;
        capref(b, a) += aug;
      }
      flow += aug;
    }
    table.assign(static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        // Residual on the reverse edge equals the shipped mass.
        double shipped = capref(m_ + j, i);
        if (shipped > 1e-15) {
          table[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                static_cast<std::size_t>(j)] = shipped;
        }
      }
    }
    return flow;
  }

 private:
  const CostMatrix& cost_;
  int m_, n_;
  std::vector<double> supply_, demand_;
  std::vector<double> cap_;
};

}  // namespace

OTResult solve_ot_inf(const DiscreteMeasure& source,
                      const DiscreteMeasure& target, const MetricSpec& spec) {
  if (!spec.is_inf()) throw InputError("solve_ot_inf: spec.p must be inf");
  CostMatrix cost = build_cost_matrix(source, target, spec);
  std::vector<double> levels = cost.entries;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  BottleneckFeasibility flow(cost, source.weights(), target.weights());
  std::vector<double> table, best_table;
  int tests = 0;
  std::size_t lo = 0, hi = levels.size() - 1;
  // levels.back() always feasible: every edge allowed.
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    ++tests;
    double f = flow.max_flow(levels[mid], table);
    if (f >= 1.0 - 1e-12) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  ++tests;
  double f = flow.max_flow(levels[lo], best_table);
  if (f < 1.0 - 1e-12) {
    throw SolverError("solve_ot_inf: feasibility lost at selected threshold");
  }
  double value = levels[lo];
  OTResult res{TransportPlan(source, target, std::move(best_table)), value, value,
               tests,
               {},
               {}};
  return res;
}

OTResult solve_wasserstein(const DiscreteMeasure& source,
                           const DiscreteMeasure& target,
                           const MetricSpec& spec) {
  return spec.is_inf() ? solve_ot_inf(source, target, spec)
                       : solve_ot(source, target, spec);
}

double plan_cost(const TransportPlan& plan, const MetricSpec& spec) {
  if (spec.is_inf()) {
    double worst = 0.0;
    for (std::size_t i = 0; i < plan.rows(); ++i) {
      for (std::size_t j = 0; j < plan.cols(); ++j) {
        if (plan.at(i, j) > 0.0) {
          worst = std::max(worst,
                           ground_distance(plan.source().atom(i),
                                           plan.target().atom(j), spec));
        }
      }
    }
    return worst;
  }
  CompensatedSum s;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      double mass = plan.at(i, j);
      if (mass > 0.0) {
        s.add(mass * ground_cost(plan.source().atom(i), plan.target().atom(j), spec));
      }
    }
  }
  double total = s.value();
  return std::pow(total < 0.0 ? 0.0 : total, 1.0 / spec.p);
}

BarycentricMap barycentric_map(const TransportPlan& plan) {
  BarycentricMap out;
  out.deterministic = true;
  const int dim = plan.source().dim();
  for (std::size_t j = 0; j < plan.cols(); ++j) {
    CompensatedSum mass;
    for (std::size_t i = 0; i < plan.rows(); ++i) mass.add(plan.at(i, j));
    double col = mass.value();
    if (col <= 1e-15) {
      out.skipped.push_back(j);
      continue;
    }
    Point mean(static_cast<std::size_t>(dim), 0.0);
    int nnz = 0;
    for (std::size_t i = 0; i < plan.rows(); ++i) {
      double w = plan.at(i, j);
      if (w <= 0.0) continue;
      ++nnz;
      auto a = plan.source().atom(i);
      for (int d = 0; d < dim; ++d) {
        mean[static_cast<std::size_t>(d)] += w * a[static_cast<std::size_t>(d)];
      }
    }
    for (double& c : mean) c /= col;
    if (nnz != 1) out.deterministic = false;
    out.targets.push_back(j);
    out.means.push_back(std::move(mean));
  }
  return out;
}

double marginal_vector_distance(const MarginalVector& a, const MarginalVector& b,
                                const MetricSpec& spec) {
  if (a.blocks() != b.blocks() || a.blocks() != spec.blocks()) {
    throw InputError("marginal_vector_distance: block structure mismatch");
  }
  if (spec.is_inf()) {
    double worst = 0.0;
    for (int i = 0; i < spec.blocks(); ++i) {
      OTResult r = solve_ot_inf(a.components[static_cast<std::size_t>(i)],
                                b.components[static_cast<std::size_t>(i)],
                                spec.block_spec(i));
      worst = std::max(worst, r.value);
    }
    return worst;
  }
  CompensatedSum total;
  for (int i = 0; i < spec.blocks(); ++i) {
    OTResult r = solve_ot(a.components[static_cast<std::size_t>(i)],
                          b.components[static_cast<std::size_t>(i)],
                          spec.block_spec(i));
    total.add(r.cost);
  }
  double t = total.value();
  return std::pow(t < 0.0 ? 0.0 : t, 1.0 / spec.p);
}

std::vector<double> marginal_component_distances(const MarginalVector& a,
                                                 const MarginalVector& b,
                                                 const MetricSpec& spec,
                                                 double q) {
  if (a.blocks() != b.blocks() || a.blocks() != spec.blocks()) {
    throw InputError("marginal_component_distances: block structure mismatch");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(spec.blocks()));
  for (int i = 0; i < spec.blocks(); ++i) {
    MetricSpec block(q, {spec.block_dims[static_cast<std::size_t>(i)]});
    out.push_back(solve_wasserstein(a.components[static_cast<std::size_t>(i)],
                                    b.components[static_cast<std::size_t>(i)], block)
                      .value);
  }
  return out;
}

}  // namespace wproj
