#include "wproj/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "wproj/errors.hpp"

namespace wproj {

ConditionalKernel disintegrate(const TransportPlan& plan) {
  ConditionalKernel k;
  k.conditioning = plan.target();
  k.source = plan.source();
  k.rows.resize(plan.cols());
  for (std::size_t j = 0; j < plan.cols(); ++j) {
    // Normalize by the actual column sum (== target weight within 1e-9) so
    // each row is stochastic to ulp accuracy.
    CompensatedSum col;
    for (std::size_t i = 0; i < plan.rows(); ++i) col.add(plan.at(i, j));
    double mass = col.value();
    if (!(mass > 0.0)) {
      throw SolverError("disintegrate: zero-mass conditioning column");
    }
    auto& row = k.rows[j];
    for (std::size_t i = 0; i < plan.rows(); ++i) {
      double v = plan.at(i, j);
      if (v > 0.0) row.emplace_back(i, v / mass);
    }
  }
  return k;
}

namespace {

struct IndexKey {
  std::vector<std::size_t> idx;
  bool operator==(const IndexKey& o) const { return idx == o.idx; }
};

struct IndexKeyHash {
  std::size_t operator()(const IndexKey& k) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (std::size_t v : k.idx) {
      h ^= v + 0x9e3779b97f4a7c15ULL;
      h *= 0x100000001b3ULL;
    }
    return h;
  }
};

}  // namespace

ShadowResult compose_shadow(const ProductMeasure& rho, const MarginalVector& mu,
                            const MetricSpec& spec, std::size_t support_cap) {
  if (mu.blocks() != spec.blocks() || rho.spec.blocks() != spec.blocks()) {
    throw InputError("compose_shadow: block structure mismatch");
  }
  for (int i = 0; i < spec.blocks(); ++i) {
    if (mu.components[static_cast<std::size_t>(i)].dim() !=
        spec.block_dims[static_cast<std::size_t>(i)]) {
      throw InputError("compose_shadow: marginal dimension mismatch at block " +
                       std::to_string(i));
    }
  }

  const int K = spec.blocks();
  ShadowResult out;
  out.per_marginal_values.reserve(static_cast<std::size_t>(K));
  out.kernels.reserve(static_cast<std::size_t>(K));

  // Per-block optimal couplings gamma_i between mu_i and rho_i, then kernels
  // kappa_i conditioned on rho_i.
  std::vector<std::vector<std::size_t>> rho_block_index(static_cast<std::size_t>(K));
  CompensatedSum cost_acc;
  double worst = 0.0;
  for (int i = 0; i < K; ++i) {
    auto [rho_i, index_of] = marginal_with_index(rho, i);
    rho_block_index[static_cast<std::size_t>(i)] = std::move(index_of);
    MetricSpec block = spec.block_spec(i);
    OTResult ot = solve_wasserstein(mu.components[static_cast<std::size_t>(i)], rho_i, block);
    out.per_marginal_values.push_back(ot.value);
    if (spec.is_inf()) {
      worst = std::max(worst, ot.value);
    } else {
      cost_acc.add(ot.cost);
    }
    out.kernels.push_back(disintegrate(ot.plan));
  }
  out.value = spec.is_inf()
                  ? worst
                  : std::pow(std::max(cost_acc.value(), 0.0), 1.0 / spec.p);

  // Cheap support-size bound before enumerating.
  {
    double projected = 0.0;
    for (std::size_t a = 0; a < rho.base.size(); ++a) {
      double combo = 1.0;
      for (int i = 0; i < K; ++i) {
        const auto& kern = out.kernels[static_cast<std::size_t>(i)];
        combo *= static_cast<double>(
            kern.rows[rho_block_index[static_cast<std::size_t>(i)][a]].size());
      }
      projected += combo;
    }
    if (projected > static_cast<double>(support_cap)) {
      throw SizeError("compose_shadow: projected support " +
                      std::to_string(static_cast<std::size_t>(projected)) +
                      " exceeds cap " + std::to_string(support_cap));
    }
  }

  // pi*(x) = sum_y rho(y) prod_i kappa_i(x_i | y_i), over nonzero products.
  const int dim = spec.total_dim();
  std::unordered_map<IndexKey, std::size_t, IndexKeyHash> atom_index;
  std::vector<double> coords;
  std::vector<CompensatedSum> weight_acc;
  std::unordered_map<std::size_t, std::unordered_map<std::size_t, CompensatedSum>> glued_mass;

  std::vector<std::size_t> pick(static_cast<std::size_t>(K), 0);
  for (std::size_t y = 0; y < rho.base.size(); ++y) {
    double ry = rho.base.weight(y);
    // Odometer over the K sparse kernel rows for this y.
    std::vector<const std::vector<std::pair<std::size_t, double>>*> rows(
        static_cast<std::size_t>(K));
    bool any_empty = false;
    for (int i = 0; i < K; ++i) {
      rows[static_cast<std::size_t>(i)] =
          &out.kernels[static_cast<std::size_t>(i)]
               .rows[rho_block_index[static_cast<std::size_t>(i)][y]];
      if (rows[static_cast<std::size_t>(i)]->empty()) any_empty = true;
    }
    if (any_empty) continue;
    std::fill(pick.begin(), pick.end(), 0);
    while (true) {
      double mass = ry;
      IndexKey key;
      key.idx.resize(static_cast<std::size_t>(K));
      for (int i = 0; i < K; ++i) {
        const auto& [src_idx, prob] = (*rows[static_cast<std::size_t>(i)])[pick[static_cast<std::size_t>(i)]];
        mass *= prob;
        key.idx[static_cast<std::size_t>(i)] = src_idx;
      }
      if (mass > 0.0) {
        auto [it, inserted] = atom_index.emplace(key, weight_acc.size());
        if (inserted) {
          coords.resize(coords.size() + static_cast<std::size_t>(dim));
          double* dst = coords.data() + coords.size() - static_cast<std::size_t>(dim);
          for (int i = 0; i < K; ++i) {
            auto a = out.kernels[static_cast<std::size_t>(i)].source.atom(
                key.idx[static_cast<std::size_t>(i)]);
            for (double c : a) *dst++ = c;
          }
          weight_acc.emplace_back();
        }
        weight_acc[it->second].add(mass);
        glued_mass[it->second][y].add(mass);
      }
      // Advance odometer.
      int k = 0;
      for (; k < K; ++k) {
        if (++pick[static_cast<std::size_t>(k)] < rows[static_cast<std::size_t>(k)]->size()) break;
        pick[static_cast<std::size_t>(k)] = 0;
      }
      if (k == K) break;
    }
  }

  std::vector<double> weights(weight_acc.size());
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = weight_acc[i].value();
  out.shadow = ProductMeasure(
      DiscreteMeasure::from_flat(dim, std::move(coords), std::move(weights)), spec);

  out.glued.reserve(glued_mass.size());
  for (const auto& [x, per_y] : glued_mass) {
    for (const auto& [y, acc] : per_y) {
      out.glued.push_back({x, y, acc.value()});
    }
  }
  std::sort(out.glued.begin(), out.glued.end(), [](const GluedEntry& a, const GluedEntry& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  return out;
}

MapInducedResult is_map_induced(const ShadowResult& result) {
  MapInducedResult out;
  out.is_map = true;
  out.maps.reserve(result.kernels.size());
  for (const ConditionalKernel& k : result.kernels) {
    std::vector<std::size_t> map(k.rows.size(), 0);
    for (std::size_t j = 0; j < k.rows.size(); ++j) {
      if (k.rows[j].size() != 1) {
        out.is_map = false;
      } else {
        map[j] = k.rows[j][0].first;
      }
    }
    out.maps.push_back(std::move(map));
  }
  if (!out.is_map) {
    out.maps.clear();
    return out;
  }
  // Deterministic kernels make the product kernel a Dirac per conditioning
  // atom, so the glued coupling must route each rho atom to exactly one
  // shadow atom; this is the pushforward identity shadow = (T_1,...,T_K)#rho.
  std::vector<int> hits;
  for (const GluedEntry& e : result.glued) {
    if (e.y >= hits.size()) hits.resize(e.y + 1, 0);
    ++hits[e.y];
  }
  for (int h : hits) {
    if (h != 1) {
      throw SolverError("is_map_induced: deterministic kernels but glued coupling "
                        "splits a conditioning atom");
    }
  }
  return out;
}

}  // namespace wproj
