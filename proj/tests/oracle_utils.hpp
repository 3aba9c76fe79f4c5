#pragma once

// Test-only brute-force oracles, independent of the production solver paths:
// vertices of the transportation polytope are enumerated as spanning bases of
// the complete bipartite graph, and tiny equality-form LPs are minimized by
// enumerating basic feasible solutions column-subset by column-subset.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "wproj/measures.hpp"
#include "wproj/mot.hpp"
#include "wproj/ot.hpp"

namespace wproj::testing {

// Flows on a spanning tree of K_{m,n} are determined by peeling leaves.
// Returns std::nullopt if some flow is negative (infeasible basis).
inline std::optional<std::vector<double>> tree_flows(
    int m, int n, const std::vector<std::pair<int, int>>& edges,
    const std::vector<double>& supply, const std::vector<double>& demand) {
  const int nodes = m + n;
  std::vector<double> residual(static_cast<std::size_t>(nodes));
  for (int i = 0; i < m; ++i) residual[static_cast<std::size_t>(i)] = supply[static_cast<std::size_t>(i)];
  for (int j = 0; j < n; ++j) residual[static_cast<std::size_t>(m + j)] = demand[static_cast<std::size_t>(j)];
  std::vector<int> degree(static_cast<std::size_t>(nodes), 0);
  std::vector<char> used(edges.size(), 0);
  for (const auto& [i, j] : edges) {
    ++degree[static_cast<std::size_t>(i)];
    ++degree[static_cast<std::size_t>(m + j)];
  }
  std::vector<double> flow(edges.size(), 0.0);
  for (std::size_t round = 0; round < edges.size(); ++round) {
    // Find an unused edge with a leaf endpoint.
    std::size_t pick = edges.size();
    int leaf = -1;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (used[e]) continue;
      int a = edges[e].first, b = m + edges[e].second;
      if (degree[static_cast<std::size_t>(a)] == 1) {
        pick = e;
        leaf = a;
        break;
      }
      if (degree[static_cast<std::size_t>(b)] == 1) {
        pick = e;
        leaf = b;
        break;
      }
    }
    if (pick == edges.size()) return std::nullopt;  // cycle: not a tree
    int a = edges[pick].first, b = m + edges[pick].second;
    int other = leaf == a ? b : a;
    double f = residual[static_cast<std::size_t>(leaf)];
    if (f < -1e-12) return std::nullopt;
    flow[pick] = f;
    residual[static_cast<std::size_t>(leaf)] = 0.0;
    residual[static_cast<std::size_t>(other)] -= f;
    used[pick] = 1;
    --degree[static_cast<std::size_t>(a)];
    --degree[static_cast<std::size_t>(b)];
  }
  for (double f : flow) {
    if (f < -1e-12) return std::nullopt;
  }
  return flow;
}

struct BruteForceOT {
  double value = 0.0;      // W_p distance (bottleneck value for p = inf)
  double cost = 0.0;       // sum flow * d^p for finite p
  long bases_checked = 0;  // feasible spanning bases seen
};

// Exhaustive minimum over the transportation-polytope vertices.
inline BruteForceOT brute_force_ot(const DiscreteMeasure& source,
                                   const DiscreteMeasure& target,
                                   const MetricSpec& spec) {
  const int m = static_cast<int>(source.size());
  const int n = static_cast<int>(target.size());
  const int cells = m * n;
  const int basis_size = m + n - 1;
  std::vector<double> cost(static_cast<std::size_t>(cells));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      cost[static_cast<std::size_t>(i * n + j)] = ground_cost(
          source.atom(static_cast<std::size_t>(i)), target.atom(static_cast<std::size_t>(j)), spec);
    }
  }

  std::vector<char> mask(static_cast<std::size_t>(cells), 0);
  std::fill(mask.begin(), mask.begin() + basis_size, 1);
  std::sort(mask.begin(), mask.end());  // lexicographically first combination

  BruteForceOT best;
  best.value = kInf;
  best.cost = kInf;
  do {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(basis_size));
    for (int c = 0; c < cells; ++c) {
      if (mask[static_cast<std::size_t>(c)]) edges.emplace_back(c / n, c % n);
    }
    auto flows = tree_flows(m, n, edges, source.weights(), target.weights());
    if (!flows) continue;
    ++best.bases_checked;
    if (spec.is_inf()) {
      double bottleneck = 0.0;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if ((*flows)[e] > 1e-12) {
          bottleneck = std::max(
              bottleneck,
              cost[static_cast<std::size_t>(edges[e].first * n + edges[e].second)]);
        }
      }
      if (bottleneck < best.value) {
        best.value = bottleneck;
        best.cost = bottleneck;
      }
    } else {
      double total = 0.0;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        total += (*flows)[e] *
                 cost[static_cast<std::size_t>(edges[e].first * n + edges[e].second)];
      }
      if (total < best.cost) {
        best.cost = total;
        best.value = std::pow(std::max(total, 0.0), 1.0 / spec.p);
      }
    }
  } while (std::next_permutation(mask.begin(), mask.end()));
  return best;
}

// Gaussian-elimination rank of a dense matrix (rows x cols).
inline int matrix_rank(std::vector<std::vector<double>> a) {
  int rank = 0;
  const int rows = static_cast<int>(a.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(a[0].size());
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = -1;
    double best = 1e-9;
    for (int r = rank; r < rows; ++r) {
      if (std::abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) > best) {
        best = std::abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
        piv = r;
      }
    }
    if (piv < 0) continue;
    std::swap(a[static_cast<std::size_t>(rank)], a[static_cast<std::size_t>(piv)]);
    double inv = 1.0 / a[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c)];
    for (int r = 0; r < rows; ++r) {
      if (r == rank) continue;
      double f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * inv;
      if (f == 0.0) continue;
      for (int k = c; k < cols; ++k) {
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] -=
            f * a[static_cast<std::size_t>(rank)][static_cast<std::size_t>(k)];
      }
    }
    ++rank;
  }
  return rank;
}

// Solves the square/overdetermined system A_S x = b by Gaussian elimination
// with partial pivoting on the stacked system; returns nullopt when the
// residual is large (inconsistent subset).
inline std::optional<std::vector<double>> solve_subset(
    const std::vector<std::vector<double>>& rows, const std::vector<double>& rhs,
    const std::vector<int>& cols) {
  const int m = static_cast<int>(rows.size());
  const int k = static_cast<int>(cols.size());
  std::vector<std::vector<double>> a(static_cast<std::size_t>(m),
                                     std::vector<double>(static_cast<std::size_t>(k + 1)));
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < k; ++c) {
      a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])];
    }
    a[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] = rhs[static_cast<std::size_t>(r)];
  }
  // Forward elimination.
  std::vector<int> pivot_of_col(static_cast<std::size_t>(k), -1);
  int row = 0;
  for (int c = 0; c < k && row < m; ++c) {
    int piv = -1;
    double best = 1e-10;
    for (int r = row; r < m; ++r) {
      if (std::abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) > best) {
        best = std::abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
        piv = r;
      }
    }
    if (piv < 0) continue;
    std::swap(a[static_cast<std::size_t>(row)], a[static_cast<std::size_t>(piv)]);
    double inv = 1.0 / a[static_cast<std::size_t>(row)][static_cast<std::size_t>(c)];
    for (int r = 0; r < m; ++r) {
      if (r == row) continue;
      double f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * inv;
      if (f == 0.0) continue;
      for (int q = c; q <= k; ++q) {
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(q)] -=
            f * a[static_cast<std::size_t>(row)][static_cast<std::size_t>(q)];
      }
    }
    pivot_of_col[static_cast<std::size_t>(c)] = row;
    ++row;
  }
  std::vector<double> x(static_cast<std::size_t>(k), 0.0);
  for (int c = 0; c < k; ++c) {
    int r = pivot_of_col[static_cast<std::size_t>(c)];
    if (r >= 0) {
      x[static_cast<std::size_t>(c)] =
          a[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] /
          a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  // Residual check against all rows.
  for (int r = 0; r < m; ++r) {
    double lhs = 0.0;
    for (int c = 0; c < k; ++c) {
      lhs += rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])] *
             x[static_cast<std::size_t>(c)];
    }
    if (std::abs(lhs - rhs[static_cast<std::size_t>(r)]) > 1e-8) return std::nullopt;
  }
  return x;
}

// Exhaustive minimum of min c'x, Ax = b, x >= 0 over basic solutions:
// enumerate all column subsets of size rank(A).
inline std::optional<double> brute_force_lp_min(const LinearProgram& lp) {
  const int n = static_cast<int>(lp.num_vars);
  const int rank = matrix_rank(lp.rows);
  if (rank > n) return std::nullopt;
  std::vector<int> cols(static_cast<std::size_t>(rank));
  std::iota(cols.begin(), cols.end(), 0);
  double best = kInf;
  bool found = false;
  while (true) {
    auto x = solve_subset(lp.rows, lp.rhs, cols);
    if (x) {
      bool feasible = true;
      for (double v : *x) {
        if (v < -1e-9) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        double obj = 0.0;
        for (int c = 0; c < rank; ++c) {
          obj += lp.objective[static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])] *
                 std::max(0.0, (*x)[static_cast<std::size_t>(c)]);
        }
        if (obj < best) best = obj;
        found = true;
      }
    }
    // Next combination.
    int i = rank - 1;
    while (i >= 0 && cols[static_cast<std::size_t>(i)] == n - rank + i) --i;
    if (i < 0) break;
    ++cols[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < rank; ++j) {
      cols[static_cast<std::size_t>(j)] = cols[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  if (!found) return std::nullopt;
  return best;
}

}  // namespace wproj::testing
